#!/usr/bin/env python3
"""Independent encoder for the canonical byte formats.

Builds a fixed sample transaction, the genesis header and small Merkle trees
with nothing but struct and hashlib, then prints the hex goldens that the Rust
tests freeze. The output is saved as goldens.json. It also scrambles a fixed
template under the bundled key for actor 100 and prints squared distances.
"""
import hashlib
import json
import os
import struct

HERE = os.path.dirname(os.path.abspath(__file__))
SCENARIOS = os.path.join(HERE, "..", "crates", "cli", "scenarios")


def s(text):
    b = text.encode("utf-8")
    return struct.pack(">I", len(b)) + b


def strs(items):
    return struct.pack(">I", len(items)) + b"".join(s(x) for x in items)


def sample_tx(nonce):
    out = s("lettuce-42")
    out += struct.pack(">B", 0)  # FARM
    out += s("b1") + s("salinas")
    out += struct.pack(">iQQ", -5, 1000, 7)
    out += strs(["lettuce"]) + strs([])
    out += struct.pack(">II", 100, 100)
    out += b"".join(struct.pack(">h", (i % 7) - 3) for i in range(64))
    out += struct.pack(">Q?IQ", 12345, True, 2, nonce)
    return out


def sha(*parts):
    h = hashlib.sha256()
    for p in parts:
        h.update(p)
    return h.digest()


def header(version, height, prev, root, timestamp, proposer):
    return struct.pack(">IQ", version, height) + prev + root + struct.pack(">QI", timestamp, proposer)


def main():
    tx_a = sample_tx(0xDEADBEEF)
    tx_b = sample_tx(1)
    genesis = header(1, 0, bytes(32), bytes(32), 0, 0)
    leaf_a = sha(b"\x00", tx_a)
    leaf_b = sha(b"\x00", tx_b)
    root2 = sha(b"\x01", leaf_a, leaf_b)
    root3 = sha(b"\x01", sha(b"\x01", leaf_a, leaf_b), sha(b"\x01", leaf_a, leaf_a))

    with open(os.path.join(SCENARIOS, "actors", "100.key.json")) as f:
        key = json.load(f)
    t1 = [(i * 37) % 2001 - 1000 for i in range(64)]
    t2 = [(i * 53 + 11) % 2001 - 1000 for i in range(64)]
    scr1 = [key["signs"][i] * t1[key["permutation"][i]] for i in range(64)]
    scr2 = [key["signs"][i] * t2[key["permutation"][i]] for i in range(64)]

    print(json.dumps({
        "sample_tx_hex": tx_a.hex(),
        "sample_tx_id": sha(tx_a).hex(),
        "genesis_header_hex": genesis.hex(),
        "genesis_hash": sha(genesis).hex(),
        "merkle_root_two": root2.hex(),
        "merkle_root_three_ab_a": root3.hex(),
        "scrambled_t1_first8": scr1[:8],
        "plain_distance": sum((a - b) ** 2 for a, b in zip(t1, t2)),
        "scrambled_distance": sum((a - b) ** 2 for a, b in zip(scr1, scr2)),
    }, indent=2))


if __name__ == "__main__":
    main()
