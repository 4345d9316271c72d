"""Central-difference gradient verification.

The analytical side of every gradient in this package comes from torch
autograd; this module is the independent numerical side. Checks run in
float64 with step 1e-5. Failures are reported, not raised.
"""

from dataclasses import dataclass, field

import torch


@dataclass
class GradCheckReport:
    passed: bool
    max_error: float
    worst_input: str = ""
    per_input: dict = field(default_factory=dict)

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return f"gradcheck {status}: max_error={self.max_error:.3e} at {self.worst_input!r}"


def finite_difference_check(fn, inputs, tolerance=1e-4, step=1e-5):
    """Compare autograd gradients of the scalar `fn()` against central
    differences over every coordinate of `inputs`.

    `inputs` is a dict name -> float64 leaf tensor with requires_grad=True;
    `fn` must rebuild the forward pass from those tensors on every call.
    Per-coordinate error is |analytic - numeric| / max(1, |analytic|,
    |numeric|), i.e. absolute near zero and relative away from it.
    """
    for name, tensor in inputs.items():
        if tensor.dtype != torch.float64:
            raise ValueError(f"gradcheck input {name!r} must be float64")
        if not tensor.requires_grad:
            raise ValueError(f"gradcheck input {name!r} must require grad")
        tensor.grad = None

    value = fn()
    if value.dim() != 0:
        raise ValueError("fn must return a scalar")
    value.backward()
    analytic = {
        name: (t.grad.detach().clone() if t.grad is not None else torch.zeros_like(t))
        for name, t in inputs.items()
    }

    max_error, worst = 0.0, ""
    per_input = {}
    for name, tensor in inputs.items():
        flat = tensor.detach().reshape(-1)
        grad_flat = analytic[name].reshape(-1)
        worst_here = 0.0
        for i in range(flat.numel()):
            orig = flat[i].item()
            with torch.no_grad():
                flat[i] = orig + step
            f_plus = float(fn().detach())
            with torch.no_grad():
                flat[i] = orig - step
            f_minus = float(fn().detach())
            with torch.no_grad():
                flat[i] = orig
            numeric = (f_plus - f_minus) / (2.0 * step)
            a = float(grad_flat[i])
            err = abs(a - numeric) / max(1.0, abs(a), abs(numeric))
            if err > worst_here:
                worst_here = err
            if err > max_error:
                max_error, worst = err, f"{name}[{i}]"
        per_input[name] = worst_here
    return GradCheckReport(max_error < tolerance, max_error, worst, per_input)
