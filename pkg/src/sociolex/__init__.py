"""sociolex: sociolinguistic markers vs socioeconomic status, at desk scale.

Library for ingesting post corpora, extracting French negation / plural /
vocabulary markers, attaching census socioeconomic indicators through
geolocation, building mutual-mention networks, and running the
correlation / homophily battery against planted-effect synthetic data.
"""

__version__ = "0.1.0"

from .corpus import (CleanPost, IngestStats, RawPost, UserTimeline,
                     build_timelines, ingest, preprocess)
from .lingmark import (LinguisticProfile, MarkerCounts, PluralLexicon,
                       detect_negation, detect_plural, group_average,
                       profile_user)
from .geoloc import (GridCell, HomeLocation, PatchIndex, RegionMap,
                     assign_patch, filter_overused_coords, infer_home,
                     project, representativeness, unproject)
from .ses import (ClassPartition, Patch, UserSES, compute_indicators,
                  partition_classes, ses_cross_correlations)
from .socionet import (HomophilyMatrix, MentionGraph, NullEnsemble,
                       build_network, chi_square_test, configuration_null,
                       homophily_matrix, sample_pairs)
from .analysis import (BinnedPoints, SimilarityDistribution, StatResult,
                       TemporalProfile, binned_regression,
                       multivariate_regression, pearson,
                       similarity_distributions, spatial_aggregate,
                       temporal_profile)
from .synth import SynthConfig, generate
