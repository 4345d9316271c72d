from .base import AttackResult, finalize_result
from .cw import CWAttack
from .gradient import FGSMAttack, IFGMAttack
from .translation import IdentityAttack, TranslationAttack
