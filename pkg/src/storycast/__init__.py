"""Read-together storybook sessions.

Cast each character in a book to a synthetic voice or a human reader, then
step through the book line by line at the pace a parent sets. The package is
layered: model/bookfile define the script format, casting and engine carry the
session rules, tts renders and caches audio, library persists everything as
plain files, and api/cli expose the whole thing over HTTP.
"""

from .bookfile import book_to_document, parse_book, serialize_book
from .casting import (
    AgentVoice,
    CastReport,
    CastSheet,
    HumanAdult,
    HumanChild,
    Reader,
    assign,
    preview_greeting,
    unassign,
    validate_cast,
)
from .engine import (
    AgentSpeaking,
    AwaitHuman,
    AwaitingHuman,
    Completed,
    Idle,
    NotStarted,
    PlayAgent,
    ReadingSession,
    SessionComplete,
    SessionView,
    advance,
    available_controls,
    current_view,
    playback_finished,
    replay_current,
    replay_session,
    start_session,
    step_back,
)
from .errors import (
    BackendUnavailable,
    BookMismatch,
    BookSyntaxError,
    ControlNotAvailable,
    IncompleteCast,
    InvalidBook,
    NotFound,
    SchemaError,
    StaleRequest,
    StorageError,
    StorycastError,
    TextTooLong,
    UnknownCharacter,
    UnknownVoice,
    ValidationError,
    VoiceInUse,
)
from .library import LibraryRoot, SessionRecord
from .model import AgeRange, BookScript, Character, Line, lines_for, validate_book
from .tts import AudioAsset, MockSynthesizer, RemoteSynthesizer, SynthesisRequest, TtsGateway
from .voices import VOICES, VoiceProfile, get_voice, greeting_text

__version__ = "0.1.0"
