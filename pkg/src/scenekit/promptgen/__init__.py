"""Few-shot prompt assembly, LLM client, and diagnostic-guided repair loop."""

from scenekit.promptgen.template import (
    COLLISION_PHRASES,
    DEFAULT_TEMPLATE,
    PromptTemplate,
    ScenarioType,
    assemble_prompt,
)
from scenekit.promptgen.library import (
    EmptyLibraryError,
    ExampleLibrary,
    LibraryEntry,
    LibraryError,
    builtin_library,
    load_library,
    select_examples,
)
from scenekit.promptgen.client import (
    ApiError,
    EmptyResponseError,
    EndpointConfig,
    TransportError,
    call_llm,
)
from scenekit.promptgen.extract import extract_script
from scenekit.promptgen.generate import (
    GenerationRequest,
    GenerationRound,
    Transcript,
    generate_scenario,
)
from scenekit.promptgen.stubserver import StubLLMServer
