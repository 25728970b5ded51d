"""Command handlers for the grsreach CLI."""

from .grs import cmd_grs
from .synth import cmd_synth
from .verify import cmd_verify

__all__ = [
    'cmd_grs',
    'cmd_synth',
    'cmd_verify',
]
