from .discriminator import Discriminator, graph_convolution
from .generator import Generator, encode_label, generator_geometry
from .losses import discriminator_loss, generator_loss
from .trainer import LGGANAttack, sample_targets
