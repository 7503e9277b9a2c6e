"""Minimal numpy network kernel: layers, losses, Adam and gradient checks."""
from .gradcheck import GradCheckReport, grad_check
from .layers import LSTM, Dropout, LeakyReLU, Linear, Sigmoid
from .losses import CRITERIA, bce, bce_loss, log_one_minus, mse
from .nets import (
    LstmDiscriminator,
    LstmGenerator,
    LstmNetSpec,
    MlpDiscriminator,
    MlpDiscSpec,
    MlpGenerator,
    Network,
)
from .optim import Adam, adam_step
from .params import NetParams

__all__ = [
    "Adam",
    "CRITERIA",
    "Dropout",
    "GradCheckReport",
    "LSTM",
    "LeakyReLU",
    "Linear",
    "LstmDiscriminator",
    "LstmGenerator",
    "LstmNetSpec",
    "MlpDiscSpec",
    "MlpDiscriminator",
    "MlpGenerator",
    "NetParams",
    "Network",
    "Sigmoid",
    "adam_step",
    "bce",
    "bce_loss",
    "grad_check",
    "log_one_minus",
    "mse",
]
