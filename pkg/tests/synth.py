"""Shared builders for tests: scripted git repositories and synthetic tables."""

from __future__ import annotations

import os
import subprocess
from pathlib import Path

import numpy as np
import pandas as pd

from commit_density.dataset import Dataset, Role

GIT_ENV = {
    "GIT_AUTHOR_NAME": "Fixture",
    "GIT_AUTHOR_EMAIL": "fixture@example.org",
    "GIT_COMMITTER_NAME": "Fixture",
    "GIT_COMMITTER_EMAIL": "fixture@example.org",
    "GIT_CONFIG_NOSYSTEM": "1",
    "HOME": "/nonexistent",
}


class Repo:
    """A throwaway repository driven step by step with fixed timestamps."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.path.mkdir(parents=True, exist_ok=True)
        self.tick = 0
        self.git("init", "-q", "-b", "main")

    def git(self, *args: str) -> str:
        env = {**os.environ, **GIT_ENV}
        date = f"2021-01-01T00:{self.tick // 60:02d}:{self.tick % 60:02d}Z"
        env["GIT_AUTHOR_DATE"] = env["GIT_COMMITTER_DATE"] = date
        out = subprocess.run(["git", "-C", str(self.path), *args], env=env, check=True,
                             capture_output=True)
        return out.stdout.decode()

    def write(self, name: str, content: str | bytes) -> None:
        target = self.path / name
        target.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(content, bytes):
            target.write_bytes(content)
        else:
            target.write_text(content)

    def remove(self, name: str) -> None:
        self.git("rm", "-q", name)

    def move(self, old: str, new: str) -> None:
        (self.path / new).parent.mkdir(parents=True, exist_ok=True)
        self.git("mv", old, new)

    def commit(self, message: str) -> str:
        self.tick += 1
        self.git("add", "-A")
        self.git("commit", "-q", "--allow-empty", "-m", message)
        return self.git("rev-parse", "HEAD").strip()

    def merge(self, branch: str, message: str) -> str:
        self.tick += 1
        self.git("merge", "-q", "--no-ff", "-m", message, branch)
        return self.git("rev-parse", "HEAD").strip()


C_SOURCE = """\
#include <stdio.h>

/* entry point */
int main(void) {
    // greet
    printf("hi\\n");
    return 0;
}
"""


def three_commit_repo(path: Path) -> Repo:
    repo = Repo(path)
    repo.write("main.c", C_SOURCE)
    repo.commit("add main")
    repo.write("main.c", C_SOURCE.replace("// greet", "// greet the user\n    // politely"))
    repo.commit("document main")
    repo.write("util.py", "# helper\ndef f():\n    return 1\n")
    repo.commit("fix helper")
    return repo


def labeled_frame(X: np.ndarray, labels, prefix: str = "x", messages=None) -> Dataset:
    """Size-feature dataset with sha1 identities and the given labels."""
    cols = [f"{prefix}{i}" for i in range(X.shape[1])]
    frame = pd.DataFrame(X, columns=cols)
    frame.insert(0, "sha1", [f"{i:040x}" for i in range(len(frame))])
    roles = {"sha1": Role.IDENTITY}
    if messages is not None:
        frame.insert(1, "message", list(messages))
        roles["message"] = Role.IDENTITY
    roles.update({c: Role.SIZE for c in cols})
    frame["label"] = list(labels)
    roles["label"] = Role.LABEL
    return Dataset(frame, roles, "synthetic")


def separable_blobs(n_per_class: int = 200, noise_features: int = 2, seed: int = 0, sep: float = 10.0):
    """Three Gaussian blobs ``sep`` standard deviations apart plus noise columns."""
    gen = np.random.default_rng(seed)
    centers = np.array([[0.0, 0.0], [sep, 0.0], [0.0, sep]])
    labels = np.repeat(np.array(["a", "c", "p"], dtype=object), n_per_class)
    informative = centers[np.repeat(np.arange(3), n_per_class)] + gen.normal(size=(3 * n_per_class, 2))
    X = np.hstack([informative, gen.normal(size=(3 * n_per_class, noise_features))])
    return X, labels, centers


def nearest_centroid(X: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d = ((X[:, None, :2] - centers[None, :, :]) ** 2).sum(axis=2)
    return np.array(["a", "c", "p"], dtype=object)[np.argmin(d, axis=1)]


def argmax_labels(n: int, informative: int = 3, noise: int = 7, seed: int = 0):
    """Labels are the argmax of the first ``informative`` columns."""
    gen = np.random.default_rng(seed)
    X = gen.normal(size=(n, informative + noise))
    labels = np.array(["a", "c", "p"], dtype=object)[np.argmax(X[:, :informative], axis=1)]
    return X, labels
