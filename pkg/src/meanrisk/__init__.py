"""Mean-risk portfolio analytics on finite probability spaces.

Evaluates convex and star-shaped risk measures, computes optimal boundaries
and efficient frontiers, detects classical / rho- / strong rho-arbitrage via
both primal optimisation and dual martingale-measure programs, and provides
price intervals for contracts outside the market.
"""
from .dual import (Density, DualSetSpec, MartingaleSets,
                   closure_dual_set, dual_evaluate,
                   dual_set, g_hat_transform, interior_martingale_feasibility,
                   martingale_feasibility, numeric_recession_probe,
                   recession_value, support_value)
from .frontier import (ArbitrageReport, EfficientFrontier, FrontierResult,
                       MeanRiskSolution, detect_arbitrage, efficient_frontier,
                       mean_rho_solve, optimal_boundary,
                       recession_ball_min, recession_efficient_frontier,
                       rho_inf_nu, rho_nu)
from .losses import (LossFunction, TargetProfile, bounded_tail_profile,
                     general_profile, lses_profile, step_profile,
                     table_profile, zero_profile)
from .lses import (LsesBreakdown, continuous_identity_check, normal_alpha_star)
from .market import (ArbitrageWitness, FiniteSpace, Market, Portfolio,
                     RandVar, check_classical_arbitrage, excess_return,
                     portfolio_slice)
from .measures import (AxiomReport, RiskSpec, SensitivityProfile, adjusted_es,
                       axiom_probe, classify_sensitivity, es, evaluate,
                       expected_loss, expected_weighted_loss,
                       numeric_sensitivity_probe, oce, shortfall_risk, var,
                       worst_case)
from .pricing import PriceInterval, augment_market, price_bounds
from .simplex import LPError, LPResult, solve_lp

__all__ = [name for name in dir() if not name.startswith("_")]
