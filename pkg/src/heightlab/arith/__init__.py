from .balls import HeightValue, log_plus, mahler_measure, weil_height, working_precision
from .cyclotomic import (
    CyclotomicNumber,
    complex_embeddings,
    cyclo_reduce,
    cyclotomic_polynomial,
    descend_all,
    minimal_conductor,
    minimal_polynomial,
    sqrt_in_field,
    sqrt_rational,
)
from .padic import FinitePlaceData, place_structure, valuation
from .quadratic import QuadraticNumber, as_cyclotomic
