from .dataset import (ChunkList, StateActionChunk, export_dataset,
                      extract_chunks, read_chunk_dir, read_chunks,
                      split_demos, write_chunks)
from .demo import (ArmTrack, Demonstration, load_demonstration, resample_demo,
                   save_demonstration)
from .replay import (PARK_LEFT, PARK_RIGHT, LabeledTrajectory,
                     grippers_from_proprio, load_trajectory, proprio, replay,
                     save_trajectory)

__all__ = [
    "ArmTrack", "ChunkList", "Demonstration", "LabeledTrajectory",
    "PARK_LEFT", "PARK_RIGHT", "StateActionChunk", "export_dataset",
    "extract_chunks", "grippers_from_proprio", "load_demonstration",
    "load_trajectory", "proprio", "read_chunk_dir", "read_chunks", "replay",
    "resample_demo", "save_demonstration", "save_trajectory", "split_demos",
    "write_chunks",
]
