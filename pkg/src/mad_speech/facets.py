from enum import Enum


class Facet(str, Enum):
    VOICE = "voice"
    GENDER = "gender"
    EMOTION = "emotion"
    ACCENT = "accent"
    NOISE = "noise"

    @property
    def tag(self):
        """Stable one-byte code used in binary files."""
        return _TAGS[self]

    @classmethod
    def from_tag(cls, tag):
        for facet, t in _TAGS.items():
            if t == tag:
                return facet
        raise ValueError(f"unknown facet tag {tag}")

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(f.value for f in cls)
            raise ValueError(f"unknown facet {value!r}; expected one of {names}") from None


_TAGS = {
    Facet.VOICE: 0,
    Facet.GENDER: 1,
    Facet.EMOTION: 2,
    Facet.ACCENT: 3,
    Facet.NOISE: 4,
}
