"""A small deterministic demo corpus, plus the builder used to write it.

The corpus has fifteen projects that exercise every detector: a reference
coin with a dated history, forks and forks-of-forks, a name-only
derivative, a structure-only copy, a license-only repository, and several
Solidity tokens.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Mapping, Sequence

from codelineage.corpus import CommitRecord, format_timestamp


def fake_hash(*parts: object) -> str:
    return hashlib.sha1("\x00".join(map(str, parts)).encode()).hexdigest()


def utc(*args: int) -> datetime:
    return datetime(*args, tzinfo=timezone.utc)


def write_tree(root: Path, files: Mapping[str, bytes | str]) -> None:
    root.mkdir(parents=True, exist_ok=True)
    for rel, content in files.items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(content.encode() if isinstance(content, str) else content)


def write_commit_log(path: Path, commits: Sequence[CommitRecord]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    # newest first, like ``git log``
    lines = [f"{c.commit_hash} {format_timestamp(c.committer_timestamp)}" for c in reversed(commits)]
    path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


@dataclass
class CorpusBuilder:
    """Writes repositories, commit logs and a manifest below ``root``."""

    root: Path
    records: list[dict] = field(default_factory=list)

    def __post_init__(self):
        self.root = Path(self.root)
        self.root.mkdir(parents=True, exist_ok=True)

    def project(self, pid: str, name: str, kind: str = "coin", symbol: str = "", category: str | None = None) -> dict:
        rec = {"id": pid, "name": name, "symbol": symbol or pid.upper()[:4], "kind": kind, "repos": [], "contracts": []}
        if category:
            rec["category"] = category
        self.records.append(rec)
        return rec

    def repo(
        self,
        project: dict,
        repo_id: str,
        files: Mapping[str, bytes | str],
        commits: Sequence[CommitRecord] = (),
        name: str | None = None,
        fork_count: int = 0,
        last_update: datetime = utc(2018, 7, 1),
        created_at: datetime | None = None,
    ) -> Path:
        path = self.root / "repos" / repo_id
        write_tree(path, files)
        entry = {
            "repo_id": repo_id,
            "name": name or repo_id,
            "path": f"repos/{repo_id}",
            "fork_count": fork_count,
            "last_update": format_timestamp(last_update),
        }
        if commits:
            write_commit_log(self.root / "logs" / f"{repo_id}.log", commits)
            entry["commit_log_path"] = f"logs/{repo_id}.log"
        if created_at is not None:
            entry["created_at"] = format_timestamp(created_at)
        project["repos"].append(entry)
        return path

    def contract(self, project: dict, filename: str, source: str, origin: str = "deployed") -> Path:
        path = self.root / "contracts" / project["id"] / filename
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(source, encoding="utf-8")
        project["contracts"].append({"path": path.relative_to(self.root).as_posix(), "origin": origin})
        return path

    def write(self, name: str = "manifest.jsonl") -> Path:
        path = self.root / name
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.records:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
        return path


# ---------------------------------------------------------------- content

LGPL = (
    "GNU LESSER GENERAL PUBLIC LICENSE\nVersion 3, 29 June 2007\n\n"
    "Copyright (C) 2007 Free Software Foundation, Inc. <http://fsf.org/>\n"
    "Everyone is permitted to copy and distribute verbatim copies\n"
    "of this license document, but changing it is not allowed.\n"
)


def mit(holders: Sequence[str]) -> str:
    lines = ["The MIT License (MIT)", ""]
    lines += [f"Copyright (c) {h}" for h in holders]
    lines += ["", "Permission is hereby granted, free of charge, to any person obtaining a copy."]
    return "\n".join(lines) + "\n"


REFERENCE_START = utc(2009, 8, 1)
REFERENCE_MODULES = (
    "main", "net", "addrman", "wallet", "script", "util", "key", "db",
    "init", "rpc", "protocol", "serialize", "bignum", "checkpoints",
)


def reference_tree(version: int) -> dict[str, str]:
    """Reference codebase at ``version`` (1-based).

    Every version rewrites two modules and adds one; from version 13 the
    sources move under ``src/consensus`` to mimic a large reorganisation.
    """
    files = {}
    modules = list(REFERENCE_MODULES) + [f"feature{i}" for i in range(1, version + 1)]
    for i, mod in enumerate(modules):
        rev = sum(1 for v in range(1, version + 1) if v % len(REFERENCE_MODULES) in (i % 14, (i + 5) % 14))
        body = (
            "// Copyright (c) 2009-2018 The Bitcoin Core developers\n"
            f"// module {mod}\n"
            f"int {mod}_revision() {{ return {rev}; }}\n"
        )
        folder = "src/consensus" if version >= 13 and i % 3 == 0 else "src"
        files[f"{folder}/{mod}.cpp"] = body
        files[f"{folder}/{mod}.h"] = f"#pragma once\nint {mod}_revision();\n"
    files["COPYING"] = mit(["2009-2018 The Bitcoin Core developers"])
    return files


def reference_history(months: int = 107) -> list[CommitRecord]:
    commits = []
    for m in range(months + 1):
        t = REFERENCE_START + timedelta(days=round(m * 30.44))
        commits.append(CommitRecord(fake_hash("reference", m), t))
        commits.append(CommitRecord(fake_hash("reference", m, "b"), t + timedelta(days=9)))
    return commits


def _history(prefix: str, start: datetime, n: int, step_days: int = 11) -> list[CommitRecord]:
    return [CommitRecord(fake_hash(prefix, i), start + timedelta(days=i * step_days)) for i in range(n)]


def _sol(pragma: str, body: str) -> str:
    return f"pragma solidity {pragma};\n\n{body}\n"


SAFEMATH = """library SafeMath {
  function mul(uint256 a, uint256 b) internal pure returns (uint256) {
    uint256 c = a * b;
    assert(a == 0 || c / a == b);
    return c;
  }
  function add(uint256 a, uint256 b) internal pure returns (uint256) {
    uint256 c = a + b;
    assert(c >= a);
    return c;
  }
}"""

ERC20 = """contract ERC20Basic {
  function totalSupply() public view returns (uint256);
  function transfer(address to, uint256 value) public returns (bool);
}
contract BasicToken is ERC20Basic {
  using SafeMath for uint256;
  mapping(address => uint256) balances;
}
contract ERC20 is ERC20Basic {
  function allowance(address owner, address spender) public view returns (uint256);
}
contract StandardToken is ERC20, BasicToken {
  mapping (address => mapping (address => uint256)) internal allowed;
}
contract Ownable {
  address public owner;
}
contract MintableToken is StandardToken, Ownable {
  bool public mintingFinished = false;
}"""


@dataclass(frozen=True)
class DemoCorpus:
    root: Path
    manifest: Path
    history: Path
    trees: Path
    start: datetime

    def command(self, out: str = "out") -> str:
        return (
            f"codelineage pipeline --manifest {self.manifest} --out {out} "
            f"--history {self.history} --trees {self.trees} --start {format_timestamp(self.start)}"
        )


def write_demo_corpus(root: str | Path) -> DemoCorpus:
    from codelineage.baseline import DEFAULT_INTERVAL_DAYS, snapshot_grid

    root = Path(root)
    b = CorpusBuilder(root)

    # reference history and one materialized tree per snapshot commit
    history = reference_history()
    write_commit_log(root / "baseline" / "history.log", history)
    grid = snapshot_grid(history, REFERENCE_START, DEFAULT_INTERVAL_DAYS)
    for label, (_, commit) in enumerate(grid, 1):
        write_tree(root / "baseline" / "trees" / commit.commit_hash, reference_tree(label))

    btc_commits = _history("bitcoin", utc(2009, 1, 3), 40)
    ltc_own = _history("litecoin", utc(2011, 10, 7), 15)
    ppc_own = _history("peercoin", utc(2012, 8, 19), 12)

    btc = b.project("bitcoin", "Bitcoin", symbol="BTC", category="Finance")
    b.repo(btc, "bitcoin-core", reference_tree(18), btc_commits, name="bitcoin", fork_count=900,
           created_at=utc(2010, 12, 19))
    b.repo(btc, "bitcoin-website", {"index.html": "<html>bitcoin</html>\n"}, name="bitcoin.org", fork_count=500)
    b.repo(btc, "bitcoin-gui-kit", {"gui.cpp": "int gui() { return 0; }\n"}, name="bitcoin-gui", fork_count=50)

    ltc_tree = dict(reference_tree(5))
    ltc_tree["src/scrypt.c"] = "/* scrypt */\nint scrypt_hash(void) { return 1; }\n"
    ltc_tree["COPYING"] = mit(["2009-2014 The Bitcoin Core developers", "2011-2014 The Litecoin developers"])
    ltc = b.project("litecoin", "Litecoin", symbol="LTC")
    b.repo(ltc, "litecoin-core", ltc_tree, btc_commits[:25] + ltc_own, name="litecoin", fork_count=300,
           created_at=utc(2011, 10, 7))

    doge_tree = dict(ltc_tree)
    doge_tree["src/main.cpp"] = "// Copyright (c) 2013 The Dogecoin developers\nint main_revision() { return 99; }\n"
    doge = b.project("dogecoin", "Dogecoin", symbol="DOGE", category="Animals")
    b.repo(doge, "dogecoin-core", doge_tree, btc_commits[:25] + ltc_own[:10] + _history("dogecoin", utc(2013, 12, 6), 8),
           name="dogecoin", fork_count=200, created_at=utc(2013, 12, 6))

    planet = b.project("bitcoin-planet", "Bitcoin Planet", symbol="BTPL", category="Outer space")
    b.repo(planet, "bitcoin-planet", reference_tree(9), name="bitcoinplanet", fork_count=2)

    ppc_tree = {k: v.replace("Bitcoin Core developers", "PPCoin developers") for k, v in reference_tree(7).items()}
    ppc_tree["COPYING"] = mit(["2011-2013 The PPCoin developers"])
    ppc = b.project("peercoin", "Peercoin", symbol="PPC")
    b.repo(ppc, "ppcoin", ppc_tree, btc_commits[:20] + ppc_own, fork_count=120, created_at=utc(2012, 8, 19))

    nvc_tree = dict(ppc_tree)
    nvc_tree["COPYING"] = mit(["2011-2013 The PPCoin developers", "2013 The NovaCoin developers"])
    nvc = b.project("novacoin", "NovaCoin", symbol="NVC")
    b.repo(nvc, "novacoin", nvc_tree, btc_commits[:20] + ppc_own[:8] + _history("novacoin", utc(2013, 2, 1), 6),
           fork_count=60, created_at=utc(2013, 2, 1))

    akuya_tree = {k: f"// Akuya rewrite of {k}\n" for k in reference_tree(9) if k != "COPYING"}
    # empty files hash alike and make unrelated trees look similar
    akuya_tree.update({f"src/stub{i}.h": "" for i in range(4)})
    akuya = b.project("akuya-coin", "Akuya Coin", symbol="AKY")
    b.repo(akuya, "akuya", akuya_tree, name="akuyacoin", fork_count=1)

    eth = b.project("ethereum", "Ethereum", symbol="ETH")
    b.repo(eth, "go-ethereum", {
        "core/state.go": "// Copyright 2014 The go-ethereum Authors\npackage core\n",
        "core/vm.go": "// Copyright 2014 The go-ethereum Authors\npackage core\nfunc Run() {}\n",
        "LICENSE.md": LGPL,
    }, fork_count=700, created_at=utc(2013, 12, 26))
    eth_gold = b.project("ethereum-gold", "Ethereum Gold", kind="token", symbol="ETG")
    b.contract(eth_gold, "EthereumGold.sol", _sol("^0.4.18", SAFEMATH + "\n" + ERC20 + "\ncontract EthereumGold is MintableToken {}\n"))

    zeepin = b.project("zeepin", "Zeepin", kind="token", symbol="ZPT")
    b.repo(zeepin, "zeepin-chain", {"LICENSE.md": LGPL}, fork_count=3)

    omg = b.project("omisego", "OmiseGO", kind="token", symbol="OMG")
    b.repo(omg, "plasma-contracts", {
        "contracts/RootChain.sol": _sol("^0.4.24", 'import "openzeppelin-solidity/contracts/math/SafeMath.sol";\n'
                                        "contract RootChain is Ownable {\n  using SafeMath for uint256;\n}\n"),
        "LICENSE.md": LGPL,
    }, fork_count=40)
    b.contract(omg, "OMGToken.sol", _sol("^0.4.11", SAFEMATH + "\n" + ERC20 + "\ncontract OMGToken is MintableToken {}\n"))

    desk = b.project("tokendesk", "TokenDesk", kind="token", symbol="TDS")
    b.contract(desk, "TokenDesk.sol", _sol("^0.4.18", SAFEMATH + "\n" + ERC20 + "\ncontract TokenDesk is StandardToken {}\n"))
    b.repo(desk, "tokendesk-token", {"LICENSE.md": LGPL, "src/desk.js": "module.exports = {};\n"}, fork_count=0)

    golem = b.project("golem", "Golem", kind="token", symbol="GNT")
    b.contract(golem, "GolemNetworkToken.sol", _sol(">=0.4.4 <0.5.0",
        "contract UpgradeableToken {\n  address public upgradeMaster;\n}\n"
        "contract GolemNetworkToken is UpgradeableToken {\n  string public constant name = \"Golem Network Token\";\n}\n"))

    crypto = b.project("crypto", "Crypto", symbol="CTO")
    b.repo(crypto, "crypto-core", {
        "src/crypto.c": "int crypto(void) { return 3; }\n",
        "src/empty.h": "",
    }, fork_count=5)

    ping = b.project("cryptoping", "CryptoPing", kind="token", symbol="PING")
    b.contract(ping, "CryptoPing.sol", _sol("^0.4.18", "contract Ping {\n  uint public pings;\n}\n"))

    manifest = b.write()
    return DemoCorpus(root, manifest, root / "baseline" / "history.log", root / "baseline" / "trees", REFERENCE_START)
