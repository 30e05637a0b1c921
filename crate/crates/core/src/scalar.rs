//! Scalar abstraction shared by every matrix, vector and kernel.
//!
//! Kernels are written once against [`Scalar`]; `f32` and `f64` are the two
//! provided widths. The atomic hooks back the compare-and-swap write-back of
//! the column-major kernels.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::AddAssign;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real value type usable in every kernel.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + AddAssign + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Shared accumulator slot with lock-free floating-point add.
    type Atomic: Send + Sync;

    /// Width in bytes, as recorded in the binary cache header.
    const WIDTH: u8;

    fn atomic_zero() -> Self::Atomic;

    /// Adds `v` into `slot` with a CAS loop; returns the number of failed
    /// exchanges (retries).
    fn atomic_add(slot: &Self::Atomic, v: Self) -> usize;

    fn atomic_into(slot: Self::Atomic) -> Self;

    fn write_le(self, out: &mut Vec<u8>);

    /// Reads one value from exactly `WIDTH` little-endian bytes.
    fn read_le(bytes: &[u8]) -> Self;

    /// Raw bit pattern, widened to 64 bits (used for bitwise comparisons).
    fn bits(self) -> u64;

    #[inline]
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(Self::nan)
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! impl_scalar {
    ($t:ty, $atomic:ty, $width:expr) => {
        impl Scalar for $t {
            type Atomic = $atomic;
            const WIDTH: u8 = $width;

            #[inline]
            fn atomic_zero() -> Self::Atomic {
                <$atomic>::new(0)
            }

            #[inline]
            fn atomic_add(slot: &Self::Atomic, v: Self) -> usize {
                let mut retries = 0;
                let mut current = slot.load(Ordering::Relaxed);
                loop {
                    let next = (<$t>::from_bits(current) + v).to_bits();
                    match slot.compare_exchange_weak(current, next, Ordering::Relaxed, Ordering::Relaxed) {
                        Ok(_) => return retries,
                        Err(seen) => {
                            current = seen;
                            retries += 1;
                        }
                    }
                }
            }

            #[inline]
            fn atomic_into(slot: Self::Atomic) -> Self {
                <$t>::from_bits(slot.into_inner())
            }

            fn write_le(self, out: &mut Vec<u8>) {
                out.extend_from_slice(&self.to_le_bytes());
            }

            fn read_le(bytes: &[u8]) -> Self {
                let mut buf = [0u8; $width];
                buf.copy_from_slice(&bytes[..$width]);
                <$t>::from_le_bytes(buf)
            }

            #[inline]
            fn bits(self) -> u64 {
                self.to_bits() as u64
            }
        }
    };
}

impl_scalar!(f32, AtomicU32, 4);
impl_scalar!(f64, AtomicU64, 8);
