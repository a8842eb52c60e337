"""Phone-number identities in canonical E.164 shape."""

import re

from .errors import InvalidIdentity

_SEPARATORS = re.compile(r"[ \-()]")
_E164 = re.compile(r"\+[0-9]{7,15}")


def normalize_identity(raw: str) -> str:
    """Drop spaces, hyphens and parentheses; demand ``+`` and 7-15 digits.

    >>> normalize_identity("+34 600-111-222")
    '+34600111222'
    """
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("ascii")
        except UnicodeDecodeError as exc:
            raise InvalidIdentity("identity is not ASCII") from exc
    if not isinstance(raw, str):
        raise InvalidIdentity(f"identity must be a string, not {type(raw).__name__}")
    canon = _SEPARATORS.sub("", raw)
    if not _E164.fullmatch(canon):
        raise InvalidIdentity(f"not a phone number identity: {raw!r}")
    return canon
