import random

import pytest

from effsynth.core import (
    BOOL_T, ClassOf, ClassT, ClassTable, INT_T, MethodSig, STR_T,
)
from effsynth.runtime import SchemaDecl, World, install_core_methods, install_schema


@pytest.fixture
def blog():
    """Class table and world for a two-schema blog fixture."""
    ct = ClassTable()
    install_core_methods(ct)
    user = SchemaDecl("User", (("name", STR_T), ("username", STR_T)))
    post = SchemaDecl("Post", (("author", STR_T), ("title", STR_T), ("slug", STR_T)))
    install_schema(ct, user)
    install_schema(ct, post)
    world = World({"User": user, "Post": post})
    return ct, world


@pytest.fixture
def hierarchy():
    """Small class tree: Animal <- Dog <- Puppy, Animal <- Cat."""
    ct = ClassTable()
    ct.add_class("Animal")
    ct.add_class("Dog", "Animal")
    ct.add_class("Puppy", "Dog")
    ct.add_class("Cat", "Animal")
    return ct


def random_hierarchy(rng: random.Random, n_classes: int = 5) -> ClassTable:
    ct = ClassTable()
    names = [f"C{i}" for i in range(n_classes)]
    for i, name in enumerate(names):
        parent = "Obj" if i == 0 else rng.choice(names[:i] + ["Obj"])
        ct.add_class(name, parent)
    return ct
