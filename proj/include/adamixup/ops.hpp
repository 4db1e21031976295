#ifndef ADAMIXUP_OPS_HPP
#define ADAMIXUP_OPS_HPP

#include <cstdint>

#include "adamixup/tensor.hpp"

namespace adamixup {

// Forward ops. Each op validates input shapes, checks the output for
// NaN/Inf (NumericError on overflow), and records itself on the active tape
// when grad mode is on and any input requires grad.

// Elementwise sum. Accepts equal shapes, a scalar on either side, or a
// trailing bias vector broadcast over the rows of a rank-2 tensor.
TensorPtr add(const TensorPtr& a, const TensorPtr& b);

// Elementwise product; equal shapes or a scalar on either side.
TensorPtr mul(const TensorPtr& a, const TensorPtr& b);

// t * c for a compile-time-known constant c.
TensorPtr scale(const TensorPtr& t, double c);

// [N,K] x [K,M] -> [N,M].
TensorPtr matmul(const TensorPtr& a, const TensorPtr& b);

TensorPtr relu(const TensorPtr& x);
TensorPtr sigmoid(const TensorPtr& x);

// Elementwise clamp to [lo, hi]; gradient passes only through the interior.
TensorPtr clamp(const TensorPtr& x, double lo, double hi);

// Row-wise softmax over the last axis of a rank-1 or rank-2 tensor.
// Output entries are strictly positive and each row sums to 1.
TensorPtr softmax(const TensorPtr& x);

// Natural log with inputs clamped at 1e-12. Clamping bumps the numeric
// warning counter; the gradient is zero on the clamped branch.
TensorPtr log(const TensorPtr& x);

TensorPtr mean(const TensorPtr& x); // full reduction -> scalar
TensorPtr sum(const TensorPtr& x);  // full reduction -> scalar

// [B, ...] -> [B, F].
TensorPtr flatten(const TensorPtr& x);

// Concatenate along axis 1; rank 2 ([B,F1]+[B,F2]) or rank 4 (channels).
TensorPtr concat(const TensorPtr& a, const TensorPtr& b);

// [B,C] -> [B], picking column c.
TensorPtr select_column(const TensorPtr& x, int64_t c);

// Scales example b of x[B,...] by coeffs[b]; the batched form of mixing a
// per-example scalar into features or soft labels.
TensorPtr rowwise_scale(const TensorPtr& x, const TensorPtr& coeffs);

// x[B,Cin,H,W] * w[Cout,Cin,KH,KW] + bias[Cout], stride 1, no padding.
TensorPtr conv2d(const TensorPtr& x, const TensorPtr& w, const TensorPtr& bias);

// Window x window max pooling, stride = window, floor semantics.
TensorPtr max_pool(const TensorPtr& x, int64_t window = 2);

// Count of clamped log/division events since process start (thread-local).
uint64_t numeric_warning_count();
void reset_numeric_warnings();

} // namespace adamixup

#endif
