"""Finite presheaf categories, Kan extensions and adjoint strings, with
audits for their triangle identities, idempotency, triangulation of cubical
sets, and classes of maps created by a functor."""
from .adjstring import AdjointString, check_fully_faithful_string, check_homotopy_idempotent, check_idempotent
from .corpus import CorpusSpec, gen_corpus
from .cubes import cubify, triangulate
from .fincat import FinCat, FunctorData, build_dedekind_cube_category, build_simplex_category
from .kan import KanString, lan, ran, restrict
from .marked_bisimp import build_bisimplicial_string, build_marked_string
from .presheaf import Presheaf, PresheafMap, yoneda
from .report import AuditReport, Verdict
from .suites import run_suite
from .weqoracle import homology

__version__ = "0.1.0"
