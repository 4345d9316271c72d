"""pcadv: point-cloud adversarial attack/defense toolkit.

Label-guided generative targeted attack, PointNet/PointNet++ victim
classifiers, FGSM/IFGM/C&W/translation baselines, SRS/SOR/recenter
defenses, perturbation metrics, and a reproducible evaluation harness.
"""

from . import geometry
from .attacks import AttackResult, CWAttack, FGSMAttack, IdentityAttack, IFGMAttack, TranslationAttack
from .data import PointCloudDataset, load_dataset, make_toy_dataset
from .defenses import RecenterDefense, SORDefense, SRSDefense
from .gan import LGGANAttack
from .models import PointNetClassifier, PointNetPPClassifier, load_victim

__version__ = "0.1.0"

__all__ = [
    "AttackResult",
    "CWAttack",
    "FGSMAttack",
    "IFGMAttack",
    "IdentityAttack",
    "LGGANAttack",
    "PointCloudDataset",
    "PointNetClassifier",
    "PointNetPPClassifier",
    "RecenterDefense",
    "SORDefense",
    "SRSDefense",
    "TranslationAttack",
    "geometry",
    "load_dataset",
    "load_victim",
    "make_toy_dataset",
]
