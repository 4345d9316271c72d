"""Bias-corrected Adam over torch parameter lists.

Hand-rolled (rather than torch.optim) so the update state is a plain,
inspectable contract: per-parameter first/second moment arrays and a step
counter, with a hard error on non-finite gradients.
"""

import torch


class AdamState:
    """Moments and step counter for one parameter tensor."""

    def __init__(self, param, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.moment1 = torch.zeros_like(param, requires_grad=False)
        self.moment2 = torch.zeros_like(param, requires_grad=False)
        self.step_count = 0
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps


def adam_update(param, grad, state):
    """One in-place Adam step on `param`; increments the state's counter.

    Raises on non-finite gradients so training loops can abort cleanly
    instead of silently corrupting parameters.
    """
    if not torch.isfinite(grad).all():
        raise FloatingPointError("non-finite gradient in Adam step")
    state.step_count += 1
    t = state.step_count
    state.moment1.mul_(state.beta1).add_(grad, alpha=1.0 - state.beta1)
    state.moment2.mul_(state.beta2).addcmul_(grad, grad, value=1.0 - state.beta2)
    m_hat = state.moment1 / (1.0 - state.beta1**t)
    v_hat = state.moment2 / (1.0 - state.beta2**t)
    with torch.no_grad():
        param.addcdiv_(m_hat, v_hat.sqrt().add_(state.eps), value=-state.lr)


class Adam:
    """Adam over a list of torch parameters."""

    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.states = [AdamState(p, lr, beta1, beta2, eps) for p in self.params]

    def zero_grad(self):
        for p in self.params:
            p.grad = None

    def step(self):
        for p, state in zip(self.params, self.states):
            if p.grad is not None:
                adam_update(p, p.grad, state)
