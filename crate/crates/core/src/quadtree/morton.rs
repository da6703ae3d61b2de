//! Z-order codes for quadtree paths. Each level contributes one quadrant
//! digit `2 * row_bit + col_bit`, most significant level first.

use crate::error::{Error, Result};

/// Deepest level whose codes fit in a `u64`.
pub const MAX_MORTON_DEPTH: u32 = 31;

fn spread(v: u32) -> u64 {
    let mut x = v as u64;
    x = (x | (x << 16)) & 0x0000_FFFF_0000_FFFF;
    x = (x | (x << 8)) & 0x00FF_00FF_00FF_00FF;
    x = (x | (x << 4)) & 0x0F0F_0F0F_0F0F_0F0F;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333;
    x = (x | (x << 1)) & 0x5555_5555_5555_5555;
    x
}

fn compact(v: u64) -> u32 {
    let mut x = v & 0x5555_5555_5555_5555;
    x = (x | (x >> 1)) & 0x3333_3333_3333_3333;
    x = (x | (x >> 2)) & 0x0F0F_0F0F_0F0F_0F0F;
    x = (x | (x >> 4)) & 0x00FF_00FF_00FF_00FF;
    x = (x | (x >> 8)) & 0x0000_FFFF_0000_FFFF;
    x = (x | (x >> 16)) & 0x0000_0000_FFFF_FFFF;
    x as u32
}

pub fn morton_encode(col: u32, row: u32, depth: u32) -> Result<u64> {
    if depth > MAX_MORTON_DEPTH || (depth < 32 && (col as u64 >= 1u64 << depth || row as u64 >= 1u64 << depth)) {
        return Err(Error::MortonOutOfRange { col, row, depth });
    }
    Ok(spread(col) | (spread(row) << 1))
}

pub fn morton_decode(code: u64, depth: u32) -> Result<(u32, u32)> {
    if depth > MAX_MORTON_DEPTH || (depth < 32 && code >> (2 * depth) != 0) {
        return Err(Error::MortonOutOfRange {
            col: compact(code),
            row: compact(code >> 1),
            depth,
        });
    }
    Ok((compact(code), compact(code >> 1)))
}
