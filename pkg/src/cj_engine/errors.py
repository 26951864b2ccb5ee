"""Exception types shared across the engine.

Each maps to one error contract: the service layer translates them into the
uniform {code, message, detail} JSON body, the CLI into exit codes.
"""

from __future__ import annotations


class CjError(Exception):
    """Base class for engine errors.

    detail carries optional structured context (e.g. the pending pair on
    a conflict) that the service layer forwards verbatim.
    """

    code = "error"

    def __init__(self, *args: object, detail: object = None) -> None:
        super().__init__(*args)
        self.detail = detail


class InvalidPairError(CjError, ValueError):
    code = "invalid-pair"


class UnknownItemError(CjError, KeyError):
    code = "unknown-item"

    def __str__(self) -> str:  # KeyError quotes its repr; keep the message readable
        return self.args[0] if self.args else ""


class InvalidPosteriorError(CjError, ValueError):
    code = "invalid-posterior"


class MustUseMonteCarloError(CjError, ValueError):
    code = "must-use-mc"


class InvalidSchemeError(CjError, ValueError):
    code = "invalid-scheme"


class NotEnoughItemsError(CjError, ValueError):
    code = "not-enough-items"


class InvalidStateError(CjError, ValueError):
    code = "invalid-state"


class InvalidRankingError(CjError, ValueError):
    code = "invalid-ranking"


class InvalidDistributionError(CjError, ValueError):
    code = "invalid-distribution"


class PairingError(CjError, ValueError):
    code = "pairing-error"


class ConfigError(CjError, ValueError):
    code = "config-error"


class ValidationError(CjError, ValueError):
    code = "validation"


class ConflictError(CjError):
    code = "conflict"


class NotFoundError(CjError, KeyError):
    code = "not-found"

    def __str__(self) -> str:
        return self.args[0] if self.args else ""
