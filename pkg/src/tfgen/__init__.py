"""Construction kit and verification lab for counter-dependent generators
built from compatible (T-function) word mappings."""

from .words import Word, apply_primitive, bit_reverse, delta, inv_odd, pow_2adic, shift_rotate
from .anf import (BooleanANF, add_carry_anf, anf_of_bit, bit_slice, count_transitive,
                  cycle_structure, decompose_ergodic, ergodicity_via_anf,
                  family_criterion, family_map, is_compatible, is_ergodic_to_depth,
                  is_mp_to_depth, lift_compose, make_ergodic_delta, make_mp)
from .dsl import BoundExpr, classify, eval_expr, parse, to_text
from .wreath import (ClockFamily, ExplicitControl, FamilyOutput, GeneratorSpec,
                     Generator, InnerControl, LfsrControl, ReverseErgodicOutput,
                     TruncateOutput, build_example, generate, measure_period,
                     output_reverse_ergodic, pack_words, unpack_words,
                     validate_wp, validate_spec)
from .analysis import (AnalysisReport, berlekamp_massey, coordinate_analysis,
                       k_chain_census, l_error_lc, q1_check, realize_gamma,
                       shortest_period, strict_uniformity)

__version__ = "0.1.0"
