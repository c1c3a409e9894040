"""Persistence, HTTP API, and CLI for running live campaigns."""

from .store import CampaignStore
from .config import RigSettings, load_rig_settings

__all__ = ["CampaignStore", "RigSettings", "load_rig_settings"]
