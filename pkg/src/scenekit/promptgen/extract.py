"""Pull a scenario script out of free-form LLM output."""

from __future__ import annotations

import re

_FENCE = re.compile(r"```[a-zA-Z0-9_+-]*\n(.*?)```", re.DOTALL)

# A line that plausibly starts a script when no code fence is present.
_STATEMENT = re.compile(
    r"^\s*(param\s|behavior\s|require\s|terminate\s|[A-Za-z_][A-Za-z0-9_-]*\s*=\s*new\s)"
)


def extract_script(response: str) -> str | None:
    """Return the script portion of a model response, or None when absent.

    Fenced code blocks win (first block, any language tag).  Otherwise the
    text from the first statement-looking line onward is taken, which copes
    with models that skip fences but prefix prose.
    """
    match = _FENCE.search(response)
    if match:
        block = match.group(1).strip("\n")
        return block if block.strip() else None
    lines = response.split("\n")
    for i, line in enumerate(lines):
        if _STATEMENT.match(line):
            return "\n".join(lines[i:]).strip("\n")
    return None
