from .codec import IdentityCodec, PoolingCodec
from .conditioning import DEFAULT_CONDITION_DIM, embed_caption, unconditional
from .denoiser import (
    ConvDenoiser,
    DenoiserConfig,
    load_denoiser,
    save_denoiser,
    snap_denoiser_to_float32,
    timestep_features,
)
from .process import forward_sample, guided_noise, reverse_mean_variance, reverse_step
from .schedule import (
    subsampled_schedule,
    DEFAULT_INFERENCE_STEPS,
    DEFAULT_TRAINING_STEPS,
    NoiseSchedule,
    make_schedule,
    schedule_from_arrays,
)
from .training import TrainConfig, train_denoiser

__all__ = [
    "DEFAULT_CONDITION_DIM",
    "DEFAULT_INFERENCE_STEPS",
    "DEFAULT_TRAINING_STEPS",
    "ConvDenoiser",
    "DenoiserConfig",
    "IdentityCodec",
    "NoiseSchedule",
    "PoolingCodec",
    "TrainConfig",
    "embed_caption",
    "forward_sample",
    "guided_noise",
    "load_denoiser",
    "make_schedule",
    "reverse_mean_variance",
    "reverse_step",
    "save_denoiser",
    "schedule_from_arrays",
    "subsampled_schedule",
    "snap_denoiser_to_float32",
    "timestep_features",
    "train_denoiser",
    "unconditional",
]
