from .config import SimConfig
from .fills import FillSimResult, HorizonPolicy, fill_results_frame, run_virtual_orders, simulate_passive_fills
from .market import GeneratedMarket, calibrate_equilibrium, generate_market, simulate_streams, touch_share

__all__ = [
    "FillSimResult",
    "GeneratedMarket",
    "HorizonPolicy",
    "SimConfig",
    "calibrate_equilibrium",
    "fill_results_frame",
    "generate_market",
    "run_virtual_orders",
    "simulate_passive_fills",
    "simulate_streams",
    "touch_share",
]
