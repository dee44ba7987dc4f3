from .network import forward, grad_check, loss, poe_combine
from .params import ModelParams, init_params, load_checkpoint, save_checkpoint
from .training import StanceModel, TrainConfig, TrainResult, train
from .vocab import EncodedInput, Vocab, build_vocab, encode_input, load_embeddings

__all__ = [
    "EncodedInput",
    "ModelParams",
    "StanceModel",
    "TrainConfig",
    "TrainResult",
    "Vocab",
    "build_vocab",
    "encode_input",
    "forward",
    "grad_check",
    "init_params",
    "load_checkpoint",
    "load_embeddings",
    "loss",
    "poe_combine",
    "save_checkpoint",
    "train",
]
