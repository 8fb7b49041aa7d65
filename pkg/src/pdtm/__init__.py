"""Distance to measure (DTM) and k-power-distance-to-measure coresets."""

from .baselines import kmeans_fit, kmeans_model, witnessed_model
from .datagen import ShapeSpec, sample, support_distance
from .dtm import LocalMoments, dtm, dtm_sq, dtm_sq_batch, local_moments, local_moments_batch, semiconcavity_gap
from .files import load_model, read_points, save_model
from .kpdtm import (
    FitReport,
    PowerModel,
    assign_cells,
    empirical_loss,
    fit,
    fit_restarts,
    init_anchors,
    model_from_anchors,
    update_anchors,
)
from .neighbors import NeighborIndex, NeighborSet, build_index, knn, knn_batch
from .ot import wasserstein1, wasserstein2
from .powereval import Grid, compare_fields, dtm_field, eval_grid, eval_power_sq, sublevel_mask

__version__ = "0.1.0"
