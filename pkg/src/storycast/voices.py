"""The six built-in reading voices.

Voice ids are 1..6 and the display names are fixed ("Mate 1".."Mate 6"); both
are load-bearing for greetings and previews, so there is no configuration
knob. synthesis_params are opaque vendor hints passed through to whatever
backend renders the audio; the bundled mock backend ignores them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .errors import UnknownVoice

VoiceId = int

VOICE_IDS: tuple[VoiceId, ...] = (1, 2, 3, 4, 5, 6)


@dataclass(frozen=True)
class VoiceProfile:
    id: VoiceId
    display_name: str
    synthesis_params: Mapping[str, str] = field(default_factory=dict)


_STYLES = ("warm", "bright", "calm", "playful", "gentle", "spry")

VOICES: tuple[VoiceProfile, ...] = tuple(
    VoiceProfile(
        id=n,
        display_name=f"Mate {n}",
        synthesis_params={"vendor_voice": f"mate-{n:02d}", "style": _STYLES[n - 1]},
    )
    for n in VOICE_IDS
)


def get_voice(voice_id: VoiceId) -> VoiceProfile:
    for profile in VOICES:
        if profile.id == voice_id:
            return profile
    raise UnknownVoice(voice_id)


def greeting_text(voice_id: VoiceId) -> str:
    """The fixed self-introduction a voice speaks on its preview."""
    return f"Hello, I am {get_voice(voice_id).display_name}"
