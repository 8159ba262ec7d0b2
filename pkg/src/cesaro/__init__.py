"""Weighted Cesaro function spaces: norms, Psi-concave majorants, dual norms and witnesses."""

from .grid import (Grid, SampledFunction, cell_masses, cell_widths, cumulative_abs_integral,
                   indicator, integral, make_grid, refine_grid, sample, trapezoid_integral)
from .weights import (PsiTransform, WeightDiagnosis, WeightError, WeightSpec, psi_eval,
                      psi_inverse, validate_weight)
from .majorant import (Majorant, SupportLine, d_psi_minus, d_psi_plus, essential_majorant,
                       is_psi_concave, majorant_eval, sample_majorant, support_line)
from .norms import (NormReport, apply_Aw, apply_Bw, cesaro_norm, dual_membership, dual_norm,
                    dual_norm_quadrature, holder_check, pairing)
from .witness import (RefinementError, WitnessReport, h_function, l1_escape_sequence,
                      near_optimizer, slice_witnesses)
from .oracle import (OracleResult, brute_combination_majorant, brute_dual_norm,
                     brute_majorant)

__version__ = "0.1.0"
