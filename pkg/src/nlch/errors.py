class ConfigError(ValueError):
    pass


class HypothesisViolation(ValueError):
    """A structural hypothesis on the kernel or potential does not hold."""

    def __init__(self, hypothesis, message, witness=None):
        self.hypothesis = hypothesis
        self.witness = witness
        super().__init__(f"({hypothesis}) {message}")


class BlowUpError(FloatingPointError):
    def __init__(self, t, max_abs_phi, state=None):
        self.t = t
        self.max_abs_phi = max_abs_phi
        self.state = state  # last finite state, if any
        super().__init__(f"non-finite solution at t={t:.6g} (max|phi| before step {max_abs_phi:.6g})")
