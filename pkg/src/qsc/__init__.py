"""Variational quantum classifiers for entanglement classes of pure states."""
__version__ = "0.1.0"

from .circuits import AnsatzFamily, AnsatzSpec, build_ansatz, build_prep_circuit  # noqa: E402
from .dataset import DataSample, Dataset, GenerationConfig, generate, load, save  # noqa: E402
from .oracle import classify, cut_entropies  # noqa: E402
from .qnn import PrepStateEncoder, QNNClassifier, TrainConfig, TrainedModel, train  # noqa: E402

__all__ = [
    "AnsatzFamily", "AnsatzSpec", "build_ansatz", "build_prep_circuit",
    "DataSample", "Dataset", "GenerationConfig", "generate", "load", "save",
    "classify", "cut_entropies",
    "PrepStateEncoder", "QNNClassifier", "TrainConfig", "TrainedModel", "train",
]
