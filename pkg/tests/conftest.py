from __future__ import annotations

import pytest

from crypticproof.gateway import PromptBundle
from crypticproof.knowledge import KnowledgeBase


@pytest.fixture(scope="session")
def kb() -> KnowledgeBase:
    return KnowledgeBase.load()


@pytest.fixture(scope="session")
def bundle() -> PromptBundle:
    return PromptBundle.load()
