//! Mipmap pyramids: successively half-resolution volumes for trading image
//! quality against render speed.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::volume::ScalarVolume;

/// Ordered multi-resolution chain. Level 0 is the full-resolution volume;
/// each following level halves every dimension (ceiling division) and
/// doubles the spacing.
#[derive(Debug, Clone)]
pub struct MipPyramid {
    levels: Vec<ScalarVolume>,
}

impl MipPyramid {
    pub fn levels(&self) -> &[ScalarVolume] {
        &self.levels
    }

    pub fn level(&self, index: usize) -> Option<&ScalarVolume> {
        self.levels.get(index)
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }
}

/// Downsample one step with a 2x2x2 box filter. Cells on odd-sized edges
/// average only the voxels that exist.
fn downsample(vol: &ScalarVolume) -> Result<ScalarVolume> {
    let (nx, ny, nz) = vol.dims();
    let (sx, sy, sz) = vol.spacing();
    let (mx, my, mz) = (nx.div_ceil(2), ny.div_ceil(2), nz.div_ceil(2));
    let mut data = Vec::with_capacity(mx * my * mz);
    for k in 0..mz {
        let k0 = 2 * k;
        let k1 = (k0 + 2).min(nz);
        for j in 0..my {
            let j0 = 2 * j;
            let j1 = (j0 + 2).min(ny);
            for i in 0..mx {
                let i0 = 2 * i;
                let i1 = (i0 + 2).min(nx);
                let mut sum = 0.0f64;
                let mut count = 0u32;
                for kk in k0..k1 {
                    for jj in j0..j1 {
                        for ii in i0..i1 {
                            sum += vol.data()[vol.linear_index(ii, jj, kk)] as f64;
                            count += 1;
                        }
                    }
                }
                data.push((sum / count as f64) as f32);
            }
        }
    }
    ScalarVolume::new((mx, my, mz), (2.0 * sx, 2.0 * sy, 2.0 * sz), data)
}

pub fn build_mip_pyramid(vol: &ScalarVolume, levels: usize) -> Result<MipPyramid> {
    if levels < 1 {
        return Err(Error::Parameter(format!("level count must be >= 1, got {levels}")));
    }
    let mut chain = Vec::with_capacity(levels);
    chain.push(vol.clone());
    for _ in 1..levels {
        let next = downsample(chain.last().unwrap())?;
        chain.push(next);
    }
    Ok(MipPyramid { levels: chain })
}
