from .doubling import canonical_height_doubling, doubling_data, height_from_rational_x
from .local import (
    HeightDecomposition,
    canonical_height_local_sum,
    elliptic_log,
    lambda_arch,
    lambda_nonarch,
    lambda_nonarch_place,
    period_data,
)
from .parallelogram import canonical_height, pairwise_average_bound, parallelogram_residual
