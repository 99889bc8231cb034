"""dforge: data pipeline for multiple-choice distractor generation.

Builds cloze-style pretraining examples from a text corpus, retrieves and
ranks knowledge-graph triplets for generation-time augmentation, serializes
model training files, and scores predicted distractor lists.
"""

__version__ = "0.1.0"

TOOL_NAME = "dforge"
