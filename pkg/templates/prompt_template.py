"""Prompt template for the LLM sensor."""

# The comment is concatenated between the two halves, never interpolated,
# so braces in user text cannot corrupt the template.

SENSOR_PROMPT_PREFIX = (
    "[INST]\n"
    "Return a JSON with the following format for the given text:\n"
    "{'is_insulting': Bool,\n"
    "'is_dehumanizing':Bool,\n"
    "'is_humiliating':Bool,\n"
    "'promotes_violence':Bool,\n"
    "'promotes_genocide':Bool,\n"
    "'is_respectful':Bool}\n"
    "Text: "
)

SENSOR_PROMPT_SUFFIX = "[/INST]"
