"""
Content identities for provenance records: a checkpoint or an ensemble is
identified by the sha256 of its bytes, and rng substreams are keyed by
stable labels hashed to integers.
"""

import hashlib
import os


def calculate_checksum(path):
    shasum = hashlib.sha256()
    with open(path, "rb") as f:
        while True:
            chunk = f.read(65536)
            if not chunk:
                break
            shasum.update(chunk)
    return shasum.hexdigest()


def calculate_directory_checksum(root, pattern_suffix=(".csv", ".json")):
    """
    Hash every file in ``root`` (non-recursive) whose name ends with one of
    ``pattern_suffix``. Files are visited sorted by name and each one
    contributes its name and its own checksum, so renaming a trajectory
    changes the identity as well.
    """
    shasum = hashlib.sha256()
    for name in sorted(os.listdir(root)):
        if not name.endswith(tuple(pattern_suffix)):
            continue
        shasum.update(name.encode("utf-8"))
        shasum.update(calculate_checksum(os.path.join(root, name)).encode("ascii"))
    return shasum.hexdigest()


def label_to_int(label):
    """Map a text label onto a 64-bit integer usable as seed entropy."""
    digest = hashlib.sha256(str(label).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")
