import logging
import platform
from datetime import datetime, timezone
from pathlib import Path

import git
import numpy as np
import scipy

from tcsl import __version__

logger = logging.getLogger(__name__)

# --- Helper Functions ---

def get_repo(path=None):
    """Returns the git.Repo enclosing `path`, or None when there is none."""
    try:
        return git.Repo(Path(path or Path.cwd()), search_parent_directories=True)
    except (git.InvalidGitRepositoryError, git.NoSuchPathError):
        logger.debug("No git repository around %s; provenance will omit the commit", path)
        return None

# --- Provenance ---

def get_current_commit_sha(repo):
    try:
        return repo.head.commit.hexsha
    except ValueError:
        # Repository without commits
        return None

def is_dirty(repo):
    return repo.is_dirty(untracked_files=False)

def collect(path=None):
    """Key/value pairs describing where and with what a run was produced."""
    info = {
        "provenance.tcsl_version": __version__,
        "provenance.python": platform.python_version(),
        "provenance.numpy": np.__version__,
        "provenance.scipy": scipy.__version__,
        "provenance.created": datetime.now(timezone.utc).strftime("%Y-%m-%d %H:%M:%S UTC"),
    }
    repo = get_repo(path)
    if repo is not None:
        sha = get_current_commit_sha(repo)
        if sha:
            info["provenance.commit"] = sha
            info["provenance.dirty"] = str(is_dirty(repo)).lower()
    return info
