"""Neural evidence scorer and question-type classifier served over HTTP."""

from .config import ServiceConfig
from .train import train_classifier, train_ranker

__version__ = "0.1.0"
