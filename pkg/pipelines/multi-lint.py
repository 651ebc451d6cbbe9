"""
This file is part of decolab.
Copyright 2024-present decolab contributors.

decolab is free software: you can redistribute it and/or modify it under the terms of the
Affero GNU General Public License as published by the Free Software Foundation, either
version 3 of the License, or (at your option) any later version.

decolab is distributed in the hope that it will be useful, but WITHOUT ANY WARRANTY;
without even the implied warranty of MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.
See the Affero GNU General Public License for more details.

You should have received a copy of the Affero GNU General Public License along with decolab.
If not, see <https://www.gnu.org/licenses/>.
"""

import subprocess as sp
import sys
from pathlib import Path
from typing import Optional

to_be_linted = ["decolab", "tests", "pipelines"]
HEADER_MARK = "This file is part of decolab"


def has_license_header(file: Path) -> bool:
    # package __init__ files carry the short :copyright: docstring instead
    if file.name == "__init__.py":
        return True
    with file.open("r", encoding="utf-8") as fp:
        for idx, line in enumerate(fp):
            if idx == 10:
                break
            if line.startswith(HEADER_MARK):
                return True
    return False


def missing_init(folder: Path) -> bool:
    if folder.name == "pipelines":
        return False
    filenames = [file.name for file in folder.iterdir()]
    if not filenames:
        return False
    return "__init__.py" not in filenames


def find_scripts_dir(root: Path) -> Path:
    selected: Optional[Path] = None
    for candidate in (root / ".venv", root / "venv", root / "env"):
        if candidate.exists():
            selected = candidate
    if selected is None:
        raise RuntimeError("No virtual environment found")
    return selected / "Scripts" if sys.platform == "win32" else selected / "bin"


def run_tool(name: str, *args: str) -> bool:
    print(f"[*] Running {name}...")
    code = sp.Popen([script_path / name, *args], cwd=current_path).wait()
    if code != 0:
        print(f"[-] {name} returned an non-zero code")
        return False
    print(f"[+] {name} passed")
    return True


current_path = Path(__file__).absolute().parent.parent
script_path = find_scripts_dir(current_path)
print(f"[*] Linting decolab at {current_path}")

tool_results = [
    run_tool("isort", "-c", *to_be_linted),
    run_tool("ruff", "check", "--statistics", "--show-fixes", *to_be_linted),
    run_tool("black", "--check", *to_be_linted),
]

print("[*] Running license header check...")
folders: set[Path] = set()
bad_headers: list[Path] = []
for target in to_be_linted:
    for file in (current_path / target).glob("**/*.py"):
        folders.add(file.parent)
        if not has_license_header(file):
            bad_headers.append(file)
for file in bad_headers:
    print(f"[?] {file} is missing license header")

print("[*] Running missing __init__.py check...")
bad_folders = sorted(folder for folder in folders if missing_init(folder))
for folder in bad_folders:
    print(f"[?] {folder} is missing __init__.py")

if "--with-tests" in sys.argv[1:]:
    tool_results.append(run_tool("pytest", "-q"))

if bad_headers:
    print("[-] Please add the license header on the files above")
if bad_folders:
    print("[-] Please add __init__.py on the folders above")

if not all(tool_results) or bad_headers or bad_folders:
    print("[-] Lint finished, but some checks failed")
    sys.exit(1)
print("[+] All checks passed")
sys.exit(0)
