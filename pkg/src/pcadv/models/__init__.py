from .base import VictimClassifier
from .pointnet import PointNetClassifier
from .pointnetpp import PointNetPPClassifier

ARCHITECTURES = {
    PointNetClassifier.arch: PointNetClassifier,
    PointNetPPClassifier.arch: PointNetPPClassifier,
}


def load_victim(path):
    """Load a victim checkpoint, dispatching on its architecture tag."""
    from ..checkpoint import load_checkpoint

    kind = load_checkpoint(path).kind
    if kind not in ARCHITECTURES:
        raise ValueError(f"unknown victim architecture {kind!r}")
    return ARCHITECTURES[kind].load(path)
