from .frame import OrthonormalFrame, FrameFamily, make_frame, frame_family, cross_gram

__all__ = [
    'OrthonormalFrame',
    'FrameFamily',
    'make_frame',
    'frame_family',
    'cross_gram',
]
