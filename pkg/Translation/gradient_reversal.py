"""
Gradient reversal: identity forward, gradient scaled by -lambda backward
"""

from torch.autograd import Function

from .modeling import EncoderOutput


class GradientReversalFunction(Function):
    @staticmethod
    def forward(ctx, x, scale):
        ctx.scale = scale
        return x.view_as(x)

    @staticmethod
    def backward(ctx, grad_output):
        grad_input = None
        if ctx.needs_input_grad[0]:
            grad_input = -ctx.scale * grad_output
        return grad_input, None


def grad_reverse(h, scale=1.0):
    """
    Reverse gradients flowing into h

    Args:
        h (EncoderOutput or Tensor)
        scale (float): lambda; gradients are multiplied by -scale

    Returns:
        same type as h, forward values unchanged
    """
    if isinstance(h, EncoderOutput):
        return EncoderOutput(GradientReversalFunction.apply(h.states, float(scale)), h.mask)
    return GradientReversalFunction.apply(h, float(scale))
