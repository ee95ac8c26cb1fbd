"""Exact-arithmetic engine for quantitative algebraic effects.

Combines equational theories of probabilistic choice, nondeterminism,
exceptions, reading, writing, and contractive steps by sum and tensor;
computes the induced free-monad distance between effectful terms; solves
discounted bisimilarity metrics of finite Markov processes, labelled Markov
processes, Mealy machines, and MDPs with certified Banach iteration; and
checks finite models against theory axioms.
"""

from .bisim import (BOT, Certificate, Coalgebra, PseudoMetric, approx_term,
                    disjoint_union, format_coalgebra, leaf_target,
                    parse_coalgebras, psi_step, solve_bisim, state_target,
                    unfold_term, zero_metric)
from .errors import (DivergentGround, DomainError, ParseError, QuantAlgError,
                     UnsupportedShape)
from .extvalue import INF, ONE, ZERO, ExtValue, ext
from .modelcheck import (CheckEntry, Counterexample, FiniteAlgebra, Report,
                         check_equation, check_nonexpansive, check_theory,
                         distribution_model, format_report, parse_algebras,
                         powerset_model, reader_model, writer_model)
from .semantics import (BOUNDED, EXTENDED, DistVal, ExcLeaf, FuncVal, Guard,
                        PairVal, SemValue, SetVal, VarLeaf, apply_operation, canon_key,
                        denote, denote_with_plan, format_value, make_dist,
                        make_func, make_set, sem_dist, sem_dist_with_plan,
                        term_dist)
from .spaces import (FinDist, FinMetricSpace, box, coproduct, discrete,
                     hausdorff, hausdorff_general, kantorovich,
                     kantorovich_general, parse_spaces, power, rescale)
from .terms import (App, OpSym, Term, Var, app, bind, conv, empty_op,
                    format_term, next_op, parse_term, raise_, read, union_op,
                    variables, well_formed, write)
from .theories import (AxiomInstance, Bary, Contract, Exc, GuardLeaf,
                       LayerPlan, Monoid, ONE_POINT, OpFamily, ParamPool,
                       RATIONAL_LINE, Reader, Semi, Signature, Sum,
                       TableMonoid, Tensor, TheoryExpr, Writer, atoms, axioms,
                       instantiate_generators, labelled_mp_theory, layer_plan,
                       markov_process_theory, mdp_theory, mealy_theory,
                       parse_monoids, parse_theory, signature_of)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
