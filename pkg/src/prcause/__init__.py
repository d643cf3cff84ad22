"""Probability-raising cause analysis for Markov decision processes.

Exact-rational model checking of strict and global probability-raising
causality, cause quality measures, optimal-cause search, and extensions
to automaton-defined effects and causes.
"""

__version__ = "1.0.0"

from .errors import (ContractError, ModelError, PrcauseError,
                     UndecidedError)
from .rational import POS_INF, format_fraction, is_finite, parse_fraction
from .model import (FmScheduler, MdScheduler, Mdp, MrScheduler,
                    induced_chain, parse_mdp)
from .reach import (Eventually, FrequencyVector, Until, convex_combine,
                    max_constrained_reach, max_reach_prob, min_reach_prob,
                    reach_prob_under, scheduler_frequencies)
from .graph import Mec, mec_decompose
from .weight import ratio_extremal, ssp_expected_weight
from .automata import Dfa, Dra, parse_dfa, parse_dra
from .transforms import (CanonicalMdp, StateMap, action_causality_mdp,
                         canonical_form, cause_split, mec_quotient,
                         product_dfa, product_dra, wmin_cause)
from .checking import (CauseQuery, CauseVerdict, PrWitness, QuadraticSystem,
                       build_quadratic_system, check_gpr, check_gpr_mc,
                       check_minimality, check_spr, exists_cause,
                       lift_witness, replay_pr, round_tau_witness,
                       solve_quadratic_system, spr_singleton_check)
