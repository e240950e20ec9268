from fedpower.exceptions import ValidationError


def upload_bits(protocol, m, n, r, width):
    """Bits one client uploads per round.

    FedLoRA and FedPower send A (r x n) and B (m x r); FFA-LoRA sends B only.
    """
    if protocol in ("fedlora", "fedpower"):
        values = m * r + r * n
    elif protocol == "ffalora":
        values = m * r
    else:
        raise ValidationError(f"unknown protocol {protocol!r}")
    return int(values) * int(width)
