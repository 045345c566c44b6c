"""String <-> integer id vocabularies for entities and relations.

Inverse relations are plain tokens carrying a ``*`` prefix: the inverse of
``r`` is ``*r`` and the inverse of ``*r`` is ``r`` again, so ``**`` never
appears in a valid token.
"""

from __future__ import annotations

from .errors import ParseError

UNK_TOKEN = "<unk>"


def inverse_token(token: str) -> str:
    """Return the inverse-direction token (involution at the string level)."""
    if token.startswith("*"):
        return token[1:]
    return "*" + token


def is_inverse_token(token: str) -> bool:
    return token.startswith("*")


class Vocab:
    """Ordered token inventory with a bijective token->id mapping.

    Ids are assigned in first-seen order. ``kind`` is only used in error
    messages ("entity" / "relation"); relation vocabs additionally reject
    double-star tokens, which would break the inverse involution.
    """

    def __init__(self, kind: str = "token"):
        self.kind = kind
        self._tokens: list[str] = []
        self._ids: dict[str, int] = {}

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._ids

    def __iter__(self):
        return iter(self._tokens)

    @property
    def tokens(self) -> list[str]:
        return list(self._tokens)

    def token(self, idx: int) -> str:
        return self._tokens[idx]

    def id(self, token: str) -> int:
        """Id of a known token; KeyError if absent."""
        return self._ids[token]

    def add(self, token: str) -> int:
        """Intern ``token``, returning its id (existing id if already known)."""
        if self.kind == "relation" and token.startswith("**"):
            raise ParseError(f"double-star relation token {token!r}")
        got = self._ids.get(token)
        if got is not None:
            return got
        idx = len(self._tokens)
        self._tokens.append(token)
        self._ids[token] = idx
        return idx

    def ensure_unk(self) -> int:
        """Intern the reserved unknown token and return its id."""
        return self.add(UNK_TOKEN)

    def lookup(self, token: str) -> tuple[int, bool]:
        """Id for ``token`` against a frozen vocab.

        Unknown tokens map to the reserved unknown id; the second element is
        True when that fallback was taken. ``ensure_unk`` must have been
        called before frozen lookups.
        """
        got = self._ids.get(token)
        if got is not None:
            return got, False
        unk = self._ids.get(UNK_TOKEN)
        if unk is None:
            raise KeyError(
                f"unknown {self.kind} {token!r} and no {UNK_TOKEN!r} reserved"
            )
        return unk, True

    def copy(self) -> "Vocab":
        out = Vocab(self.kind)
        out._tokens = list(self._tokens)
        out._ids = dict(self._ids)
        return out
