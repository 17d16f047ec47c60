"""Position auctions with externality and brand-effect click models."""

from .brand_alloc import (
    BrandConfig,
    ThresholdVerdict,
    brand_last_fastpath,
    brand_threshold_probe,
    brand_welfare,
    greedy_brand_allocate,
    greedy_ratio,
    make_greedy_vs_standard_instance,
    make_tight_greedy_instance,
    optimal_brand_allocate,
    standard_allocate,
)
from .core import (
    Advertiser,
    Allocation,
    AuctionInstance,
    BrandPositionProfile,
    ExternalityParams,
    PositionProfile,
    WelfareReport,
    ecpm,
    validate_instance,
    welfare,
)
from .ctr_models import BRAND, PRACTICAL, SEPARABLE, ClickModel, check_axioms, practical_ctr, separable_ctr
from .documents import emit_instance, parse_instance
from .extern_alloc import (
    bisection_allocate,
    brute_force_allocate,
    ecpm_allocate,
    externality_welfare,
    phi,
    rank_by_score,
    score,
    swap_improves,
)
from .pricing import adjacent_swap_price, maintaining_bid_price, revenue_compare

__version__ = "0.1.0"
