from .storage import ResultStore, format_cell, to_jsonable
from .runner import RunResult, STUDIES, parallel_map, run, study

__all__ = [
    'ResultStore',
    'format_cell',
    'to_jsonable',
    'RunResult',
    'STUDIES',
    'parallel_map',
    'run',
    'study',
]
