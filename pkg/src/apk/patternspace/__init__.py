"""Abstract patterns with cutting-off, translation and support."""
from .index import PatchClasses, PatchIndex, index_for
from .io import dump, from_json, load, to_json
from .local import (DerivabilityReport, entourage_test, flc_census, local_derivability_check,
                    local_equal, local_match_dist, matched_pairs, patch_at, patch_eq,
                    repetitivity_radius)
from .patterns import (LabeledPointSet, Patch, PointSet, WeightedComb, contains_set, support,
                       translate, wedge)
from .region import (Ball, Band, Box, ClosedSet, Empty, Everything, FiniteSet, Intersection,
                     Region, Union, closed_set_from_json, intersect)

__all__ = [
    "Ball", "Band", "Box", "ClosedSet", "DerivabilityReport", "Empty", "Everything",
    "FiniteSet", "Intersection", "LabeledPointSet", "Patch", "PatchClasses", "PatchIndex",
    "PointSet", "Region", "Union", "WeightedComb", "closed_set_from_json", "contains_set",
    "dump", "entourage_test", "flc_census", "from_json", "index_for", "intersect", "load",
    "local_derivability_check", "local_equal", "local_match_dist", "matched_pairs", "patch_at",
    "patch_eq", "repetitivity_radius", "support", "to_json", "translate", "wedge",
]
