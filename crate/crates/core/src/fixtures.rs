//! Small worked tensors used throughout the docs and tests.

use crate::storage::CooTensor;

pub const X3: f64 = 1.5;
pub const X6: f64 = 2.5;
pub const X7: f64 = -3.25;
pub const X10: f64 = 4.0;

pub const A00: f64 = 1.0;
pub const A03: f64 = 2.0;
pub const A20: f64 = 3.0;

pub const T000: f64 = 1.0;
pub const T200: f64 = 2.0;
pub const T202: f64 = 3.0;
pub const T212: f64 = 4.0;
pub const T213: f64 = 5.0;

/// Length-16 vector with nonzeros at 3, 6, 7 and 10.
pub fn vector_x() -> CooTensor {
    CooTensor::from_entries(vec![16], [([3], X3), ([6], X6), ([7], X7), ([10], X10)]).unwrap()
}

/// 3x4 matrix with nonzeros at (0,0), (0,3) and (2,0); row 1 is empty.
pub fn matrix_a() -> CooTensor {
    CooTensor::from_entries(vec![3, 4], [([0, 0], A00), ([0, 3], A03), ([2, 0], A20)]).unwrap()
}

/// 3x3x4 tensor with five nonzeros spread over layers 0 and 2.
pub fn tensor_t() -> CooTensor {
    CooTensor::from_entries(
        vec![3, 3, 4],
        [
            ([0, 0, 0], T000),
            ([2, 0, 0], T200),
            ([2, 0, 2], T202),
            ([2, 1, 2], T212),
            ([2, 1, 3], T213),
        ],
    )
    .unwrap()
}

pub fn identity(n: usize) -> CooTensor {
    CooTensor::from_entries(vec![n, n], (0..n).map(|i| ([i, i], 1.0))).unwrap()
}
