# Copyright 2026 The Reblur Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ==============================================================================
"""Warp-based motion-blur model and variational two-frame deblurring.

Images are float64 arrays shaped (H, W, C) or (H, W); flows are (H, W, 2)
with the x displacement first; masks are (H, W).
"""

from ._reblur import (
    NumericError,
    ReblurError,
    backward_warp,
    deblur,
    exposure_flow_scale,
    forward_warp,
    generate_synthetic_sequence,
    gradcheck,
    load_flow,
    load_image,
    psnr,
    reachability_mask,
    reblur,
    save_flow,
    save_image,
    self_consistency_mask,
    set_num_threads,
    ssim,
    synthesize_blur_pair,
    total_loss,
)

__version__ = "0.1.0"

__all__ = [
    "NumericError",
    "ReblurError",
    "backward_warp",
    "deblur",
    "exposure_flow_scale",
    "forward_warp",
    "generate_synthetic_sequence",
    "gradcheck",
    "load_flow",
    "load_image",
    "psnr",
    "reachability_mask",
    "reblur",
    "save_flow",
    "save_image",
    "self_consistency_mask",
    "set_num_threads",
    "ssim",
    "synthesize_blur_pair",
    "total_loss",
]
