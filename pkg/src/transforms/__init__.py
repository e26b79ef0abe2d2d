from transforms.random_transform import RandomTransform, TransformKind, fwht, make_transform
from transforms.universality import concentration_slope, equivalent_operator, universality_diagnostic

__all__ = [
    "RandomTransform",
    "TransformKind",
    "fwht",
    "make_transform",
    "concentration_slope",
    "equivalent_operator",
    "universality_diagnostic",
]
