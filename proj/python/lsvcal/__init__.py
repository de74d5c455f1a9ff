from ._lsvcal import (
    InputError,
    NumericalError,
    bs_call_price,
    calibrate,
    conjugate_argmax,
    cost_value,
    default_config_json,
    generate_quotes,
    heston_call_price,
    implied_vol,
)

__all__ = [
    "InputError",
    "NumericalError",
    "bs_call_price",
    "calibrate",
    "conjugate_argmax",
    "cost_value",
    "default_config_json",
    "generate_quotes",
    "heston_call_price",
    "implied_vol",
]
