"""Cut-off KPP fronts in channel shear flows: speeds, interfaces, simulation."""

from . import flows, ptw1d, reaction, regimes, sim2d, spectral
from .flows import (FlowProfile, couette, effective_delta, flow_extrema,
                    flow_integrals, fourier_coeffs, poiseuille, zero_flow)
from .ptw1d import decay_rate_lambda_plus, solve_vstar, vstar_asymptotic
from .reaction import ReactionSpec, eval_fc, fisher, validate_kpp
from .regimes import (FrontResult, interface_balanced, interface_small_B,
                      regime_select, speed_large_A, speed_small_A,
                      speed_small_B, speed_slowly_varying, speed_uc_near1)
from .spectral import (EigenSolution, h_function, qevp_interface,
                       qevp_principal, qevp_speed_factor, sl_interface,
                       sl_large_k_asymptote, sl_principal,
                       sl_small_k_coefficient)

__version__ = "0.1.0"
