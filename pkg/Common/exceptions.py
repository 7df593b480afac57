"""
Exceptions shared by the pipeline apps
"""


class PipelineAbort(RuntimeError):
    """A pipeline stage hit a state it cannot continue from"""
