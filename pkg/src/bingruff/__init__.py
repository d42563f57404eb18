"""bingruff: spines of triangulated 3-manifolds, dangerous-collapse
detection via boundary-immersion certificates, and certified Bing spines
epsilon-close to any spine."""

from .complex_core import (
    Complex,
    HomologyProfile,
    Subcomplex,
    boundary,
    build_complex,
    euler_and_homology,
    export_off,
    hausdorff_distance,
    parse_cplx,
    serialize_cplx,
)
from .collapse import (
    CollapseSequence,
    CollapseStep,
    PartialCollapseRecord,
    RetractionRecord,
    collapse_step,
    collapse_to_spine,
    free_faces,
    parse_cseq,
    partial_collapse,
    replay,
    serialize_cseq,
)
from .plmaps import (
    BoundaryMap,
    displacement,
    evaluate,
    image_support,
    initial_boundary_map,
    preimage_points,
    push_through_collapse,
)
from .immersion import (
    DangerReport,
    ImmersionCertificate,
    certificate_text,
    check_immersion,
    classify_collapse,
)
from . import errors

__version__ = "0.1.0"
