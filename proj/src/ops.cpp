#include "adamixup/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

namespace adamixup {

namespace {

constexpr double kLogClamp = 1e-12;

thread_local uint64_t g_numeric_warnings = 0;

void check_finite(const TensorPtr& t, const char* op) {
    for (double v : t->values) {
        if (!std::isfinite(v)) {
            throw NumericError(std::string(op) + ": non-finite output (numeric overflow)");
        }
    }
}

bool want_grad(const TensorPtr& a) { return grad_enabled() && a->requires_grad; }
bool want_grad(const TensorPtr& a, const TensorPtr& b) {
    return grad_enabled() && (a->requires_grad || b->requires_grad);
}

[[noreturn]] void shape_fail(const char* op, const TensorPtr& a, const TensorPtr& b) {
    std::ostringstream os;
    os << op << ": shapes " << a->shape_str() << " and " << b->shape_str() << " do not conform";
    throw ShapeError(os.str());
}

void require_rank(const char* op, const TensorPtr& t, size_t rank) {
    if (t->shape.size() != rank) {
        std::ostringstream os;
        os << op << ": expected rank " << rank << " input, got " << t->shape_str();
        throw ShapeError(os.str());
    }
}

} // namespace

uint64_t numeric_warning_count() { return g_numeric_warnings; }
void reset_numeric_warnings() { g_numeric_warnings = 0; }

TensorPtr add(const TensorPtr& a, const TensorPtr& b) {
    enum class Mode { Same, ScalarB, ScalarA, BiasRow };
    Mode mode;
    if (a->shape == b->shape) {
        mode = Mode::Same;
    } else if (b->size() == 1) {
        mode = Mode::ScalarB;
    } else if (a->size() == 1) {
        mode = Mode::ScalarA;
    } else if (a->shape.size() == 2 && b->shape.size() == 1 && a->shape[1] == b->shape[0]) {
        mode = Mode::BiasRow;
    } else {
        shape_fail("add", a, b);
    }

    const auto& big = (mode == Mode::ScalarA) ? b : a;
    auto out = Tensor::zeros(big->shape);
    const size_t n = out->values.size();
    switch (mode) {
        case Mode::Same:
            for (size_t i = 0; i < n; ++i) out->values[i] = a->values[i] + b->values[i];
            break;
        case Mode::ScalarB:
            for (size_t i = 0; i < n; ++i) out->values[i] = a->values[i] + b->values[0];
            break;
        case Mode::ScalarA:
            for (size_t i = 0; i < n; ++i) out->values[i] = a->values[0] + b->values[i];
            break;
        case Mode::BiasRow: {
            const size_t cols = static_cast<size_t>(a->shape[1]);
            for (size_t i = 0; i < n; ++i) out->values[i] = a->values[i] + b->values[i % cols];
            break;
        }
    }
    check_finite(out, "add");
    out->requires_grad = want_grad(a, b);
    if (out->requires_grad) {
        Graph::tape().record([a, b, out, mode, n] {
            if (out->grad.empty()) return;
            if (a->requires_grad) {
                a->ensure_grad();
                if (mode == Mode::ScalarA) {
                    for (size_t i = 0; i < n; ++i) a->grad[0] += out->grad[i];
                } else {
                    for (size_t i = 0; i < n; ++i) a->grad[i] += out->grad[i];
                }
            }
            if (b->requires_grad) {
                b->ensure_grad();
                if (mode == Mode::Same) {
                    for (size_t i = 0; i < n; ++i) b->grad[i] += out->grad[i];
                } else if (mode == Mode::ScalarB) {
                    for (size_t i = 0; i < n; ++i) b->grad[0] += out->grad[i];
                } else if (mode == Mode::BiasRow) {
                    const size_t cols = b->values.size();
                    for (size_t i = 0; i < n; ++i) b->grad[i % cols] += out->grad[i];
                } else {
                    for (size_t i = 0; i < n; ++i) b->grad[i] += out->grad[i];
                }
            }
        });
    }
    return out;
}

TensorPtr mul(const TensorPtr& a, const TensorPtr& b) {
    enum class Mode { Same, ScalarB, ScalarA };
    Mode mode;
    if (a->shape == b->shape) {
        mode = Mode::Same;
    } else if (b->size() == 1) {
        mode = Mode::ScalarB;
    } else if (a->size() == 1) {
        mode = Mode::ScalarA;
    } else {
        shape_fail("mul", a, b);
    }
    const auto& big = (mode == Mode::ScalarA) ? b : a;
    auto out = Tensor::zeros(big->shape);
    const size_t n = out->values.size();
    switch (mode) {
        case Mode::Same:
            for (size_t i = 0; i < n; ++i) out->values[i] = a->values[i] * b->values[i];
            break;
        case Mode::ScalarB:
            for (size_t i = 0; i < n; ++i) out->values[i] = a->values[i] * b->values[0];
            break;
        case Mode::ScalarA:
            for (size_t i = 0; i < n; ++i) out->values[i] = a->values[0] * b->values[i];
            break;
    }
    check_finite(out, "mul");
    out->requires_grad = want_grad(a, b);
    if (out->requires_grad) {
        Graph::tape().record([a, b, out, mode, n] {
            if (out->grad.empty()) return;
            if (a->requires_grad) {
                a->ensure_grad();
                if (mode == Mode::Same) {
                    for (size_t i = 0; i < n; ++i) a->grad[i] += out->grad[i] * b->values[i];
                } else if (mode == Mode::ScalarB) {
                    for (size_t i = 0; i < n; ++i) a->grad[i] += out->grad[i] * b->values[0];
                } else {
                    for (size_t i = 0; i < n; ++i) a->grad[0] += out->grad[i] * b->values[i];
                }
            }
            if (b->requires_grad) {
                b->ensure_grad();
                if (mode == Mode::Same) {
                    for (size_t i = 0; i < n; ++i) b->grad[i] += out->grad[i] * a->values[i];
                } else if (mode == Mode::ScalarB) {
                    for (size_t i = 0; i < n; ++i) b->grad[0] += out->grad[i] * a->values[i];
                } else {
                    for (size_t i = 0; i < n; ++i) b->grad[i] += out->grad[i] * a->values[0];
                }
            }
        });
    }
    return out;
}

TensorPtr scale(const TensorPtr& t, double c) {
    auto out = Tensor::zeros(t->shape);
    const size_t n = out->values.size();
    for (size_t i = 0; i < n; ++i) out->values[i] = t->values[i] * c;
    check_finite(out, "scale");
    out->requires_grad = want_grad(t);
    if (out->requires_grad) {
        Graph::tape().record([t, out, c, n] {
            if (out->grad.empty() || !t->requires_grad) return;
            t->ensure_grad();
            for (size_t i = 0; i < n; ++i) t->grad[i] += out->grad[i] * c;
        });
    }
    return out;
}

TensorPtr matmul(const TensorPtr& a, const TensorPtr& b) {
    if (a->shape.size() != 2) shape_fail("matmul", a, b);
    const bool vec_rhs = b->shape.size() == 1;
    if (!vec_rhs && b->shape.size() != 2) shape_fail("matmul", a, b);
    const int64_t n = a->shape[0];
    const int64_t k = a->shape[1];
    const int64_t k2 = b->shape[0];
    const int64_t m = vec_rhs ? 1 : b->shape[1];
    if (k != k2) shape_fail("matmul", a, b);

    auto out = vec_rhs ? Tensor::zeros({n}) : Tensor::zeros({n, m});
    const double* pa = a->values.data();
    const double* pb = b->values.data();
    double* po = out->values.data();
    for (int64_t i = 0; i < n; ++i) {
        const double* arow = pa + i * k;
        double* orow = po + i * m;
        for (int64_t kk = 0; kk < k; ++kk) {
            const double av = arow[kk];
            const double* brow = pb + kk * m;
            for (int64_t j = 0; j < m; ++j) orow[j] += av * brow[j];
        }
    }
    check_finite(out, "matmul");
    out->requires_grad = want_grad(a, b);
    if (out->requires_grad) {
        Graph::tape().record([a, b, out, n, k, m] {
            if (out->grad.empty()) return;
            const double* g = out->grad.data();
            if (a->requires_grad) {
                a->ensure_grad();
                double* ga = a->grad.data();
                const double* pb = b->values.data();
                for (int64_t i = 0; i < n; ++i) {
                    const double* grow = g + i * m;
                    double* garow = ga + i * k;
                    for (int64_t kk = 0; kk < k; ++kk) {
                        const double* brow = pb + kk * m;
                        double acc = 0.0;
                        for (int64_t j = 0; j < m; ++j) acc += grow[j] * brow[j];
                        garow[kk] += acc;
                    }
                }
            }
            if (b->requires_grad) {
                b->ensure_grad();
                double* gb = b->grad.data();
                const double* pa = a->values.data();
                for (int64_t i = 0; i < n; ++i) {
                    const double* arow = pa + i * k;
                    const double* grow = g + i * m;
                    for (int64_t kk = 0; kk < k; ++kk) {
                        const double av = arow[kk];
                        double* gbrow = gb + kk * m;
                        for (int64_t j = 0; j < m; ++j) gbrow[j] += av * grow[j];
                    }
                }
            }
        });
    }
    return out;
}

TensorPtr relu(const TensorPtr& x) {
    auto out = Tensor::zeros(x->shape);
    const size_t n = out->values.size();
    for (size_t i = 0; i < n; ++i) out->values[i] = x->values[i] > 0.0 ? x->values[i] : 0.0;
    check_finite(out, "relu");
    out->requires_grad = want_grad(x);
    if (out->requires_grad) {
        Graph::tape().record([x, out, n] {
            if (out->grad.empty() || !x->requires_grad) return;
            x->ensure_grad();
            for (size_t i = 0; i < n; ++i) {
                if (x->values[i] > 0.0) x->grad[i] += out->grad[i];
            }
        });
    }
    return out;
}

TensorPtr clamp(const TensorPtr& x, double lo, double hi) {
    if (!(lo < hi)) throw ContractError("clamp: lo must be < hi");
    auto out = Tensor::zeros(x->shape);
    const size_t n = out->values.size();
    for (size_t i = 0; i < n; ++i) out->values[i] = std::clamp(x->values[i], lo, hi);
    check_finite(out, "clamp");
    out->requires_grad = want_grad(x);
    if (out->requires_grad) {
        Graph::tape().record([x, out, lo, hi, n] {
            if (out->grad.empty() || !x->requires_grad) return;
            x->ensure_grad();
            for (size_t i = 0; i < n; ++i) {
                if (x->values[i] > lo && x->values[i] < hi) x->grad[i] += out->grad[i];
            }
        });
    }
    return out;
}

TensorPtr sigmoid(const TensorPtr& x) {
    auto out = Tensor::zeros(x->shape);
    const size_t n = out->values.size();
    for (size_t i = 0; i < n; ++i) {
        const double v = x->values[i];
        out->values[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                                  : std::exp(v) / (1.0 + std::exp(v));
    }
    check_finite(out, "sigmoid");
    out->requires_grad = want_grad(x);
    if (out->requires_grad) {
        Graph::tape().record([x, out, n] {
            if (out->grad.empty() || !x->requires_grad) return;
            x->ensure_grad();
            for (size_t i = 0; i < n; ++i) {
                const double s = out->values[i];
                x->grad[i] += out->grad[i] * s * (1.0 - s);
            }
        });
    }
    return out;
}

TensorPtr softmax(const TensorPtr& x) {
    if (x->shape.size() != 1 && x->shape.size() != 2) {
        throw ShapeError("softmax: expected rank 1 or 2 input, got " + x->shape_str());
    }
    const int64_t rows = x->shape.size() == 2 ? x->shape[0] : 1;
    const int64_t cols = x->shape.size() == 2 ? x->shape[1] : x->shape[0];
    auto out = Tensor::zeros(x->shape);
    for (int64_t r = 0; r < rows; ++r) {
        const double* in = x->values.data() + r * cols;
        double* o = out->values.data() + r * cols;
        double mx = in[0];
        for (int64_t c = 1; c < cols; ++c) mx = std::max(mx, in[c]);
        double z = 0.0;
        for (int64_t c = 0; c < cols; ++c) {
            o[c] = std::exp(in[c] - mx);
            z += o[c];
        }
        for (int64_t c = 0; c < cols; ++c) o[c] /= z;
    }
    check_finite(out, "softmax");
    out->requires_grad = want_grad(x);
    if (out->requires_grad) {
        Graph::tape().record([x, out, rows, cols] {
            if (out->grad.empty() || !x->requires_grad) return;
            x->ensure_grad();
            for (int64_t r = 0; r < rows; ++r) {
                const double* s = out->values.data() + r * cols;
                const double* g = out->grad.data() + r * cols;
                double* gx = x->grad.data() + r * cols;
                double dot = 0.0;
                for (int64_t c = 0; c < cols; ++c) dot += g[c] * s[c];
                for (int64_t c = 0; c < cols; ++c) gx[c] += s[c] * (g[c] - dot);
            }
        });
    }
    return out;
}

TensorPtr log(const TensorPtr& x) {
    auto out = Tensor::zeros(x->shape);
    const size_t n = out->values.size();
    for (size_t i = 0; i < n; ++i) {
        double v = x->values[i];
        if (v < kLogClamp) {
            v = kLogClamp;
            ++g_numeric_warnings;
        }
        out->values[i] = std::log(v);
    }
    check_finite(out, "log");
    out->requires_grad = want_grad(x);
    if (out->requires_grad) {
        Graph::tape().record([x, out, n] {
            if (out->grad.empty() || !x->requires_grad) return;
            x->ensure_grad();
            for (size_t i = 0; i < n; ++i) {
                if (x->values[i] >= kLogClamp) x->grad[i] += out->grad[i] / x->values[i];
            }
        });
    }
    return out;
}

TensorPtr mean(const TensorPtr& x) {
    const size_t n = x->values.size();
    double acc = 0.0;
    for (double v : x->values) acc += v;
    auto out = Tensor::scalar(acc / static_cast<double>(n));
    check_finite(out, "mean");
    out->requires_grad = want_grad(x);
    if (out->requires_grad) {
        Graph::tape().record([x, out, n] {
            if (out->grad.empty() || !x->requires_grad) return;
            x->ensure_grad();
            const double g = out->grad[0] / static_cast<double>(n);
            for (size_t i = 0; i < n; ++i) x->grad[i] += g;
        });
    }
    return out;
}

TensorPtr sum(const TensorPtr& x) {
    double acc = 0.0;
    for (double v : x->values) acc += v;
    auto out = Tensor::scalar(acc);
    check_finite(out, "sum");
    out->requires_grad = want_grad(x);
    if (out->requires_grad) {
        Graph::tape().record([x, out] {
            if (out->grad.empty() || !x->requires_grad) return;
            x->ensure_grad();
            const double g = out->grad[0];
            for (size_t i = 0; i < x->grad.size(); ++i) x->grad[i] += g;
        });
    }
    return out;
}

TensorPtr flatten(const TensorPtr& x) {
    if (x->shape.size() < 2) {
        throw ShapeError("flatten: expected rank >= 2 input, got " + x->shape_str());
    }
    const int64_t batch = x->shape[0];
    const int64_t feat = x->size() / batch;
    auto out = Tensor::create({batch, feat}, x->values);
    out->requires_grad = want_grad(x);
    if (out->requires_grad) {
        Graph::tape().record([x, out] {
            if (out->grad.empty() || !x->requires_grad) return;
            x->accumulate_grad(out->grad);
        });
    }
    return out;
}

TensorPtr concat(const TensorPtr& a, const TensorPtr& b) {
    const size_t rank = a->shape.size();
    if (rank != b->shape.size() || (rank != 2 && rank != 4)) shape_fail("concat", a, b);
    for (size_t d = 0; d < rank; ++d) {
        if (d != 1 && a->shape[d] != b->shape[d]) shape_fail("concat", a, b);
    }
    std::vector<int64_t> out_shape = a->shape;
    out_shape[1] = a->shape[1] + b->shape[1];

    // bytes per axis-1 slice
    int64_t inner = 1;
    for (size_t d = 2; d < rank; ++d) inner *= a->shape[d];
    const int64_t batch = a->shape[0];
    const int64_t wa = a->shape[1] * inner;
    const int64_t wb = b->shape[1] * inner;

    auto out = Tensor::zeros(out_shape);
    for (int64_t i = 0; i < batch; ++i) {
        std::memcpy(out->values.data() + i * (wa + wb), a->values.data() + i * wa,
                    sizeof(double) * static_cast<size_t>(wa));
        std::memcpy(out->values.data() + i * (wa + wb) + wa, b->values.data() + i * wb,
                    sizeof(double) * static_cast<size_t>(wb));
    }
    check_finite(out, "concat");
    out->requires_grad = want_grad(a, b);
    if (out->requires_grad) {
        Graph::tape().record([a, b, out, batch, wa, wb] {
            if (out->grad.empty()) return;
            if (a->requires_grad) {
                a->ensure_grad();
                for (int64_t i = 0; i < batch; ++i) {
                    const double* g = out->grad.data() + i * (wa + wb);
                    double* ga = a->grad.data() + i * wa;
                    for (int64_t j = 0; j < wa; ++j) ga[j] += g[j];
                }
            }
            if (b->requires_grad) {
                b->ensure_grad();
                for (int64_t i = 0; i < batch; ++i) {
                    const double* g = out->grad.data() + i * (wa + wb) + wa;
                    double* gb = b->grad.data() + i * wb;
                    for (int64_t j = 0; j < wb; ++j) gb[j] += g[j];
                }
            }
        });
    }
    return out;
}

TensorPtr select_column(const TensorPtr& x, int64_t c) {
    require_rank("select_column", x, 2);
    const int64_t rows = x->shape[0];
    const int64_t cols = x->shape[1];
    if (c < 0 || c >= cols) throw ContractError("select_column: column index out of range");
    auto out = Tensor::zeros({rows});
    for (int64_t r = 0; r < rows; ++r) out->values[r] = x->values[r * cols + c];
    out->requires_grad = want_grad(x);
    if (out->requires_grad) {
        Graph::tape().record([x, out, rows, cols, c] {
            if (out->grad.empty() || !x->requires_grad) return;
            x->ensure_grad();
            for (int64_t r = 0; r < rows; ++r) x->grad[r * cols + c] += out->grad[r];
        });
    }
    return out;
}

TensorPtr rowwise_scale(const TensorPtr& x, const TensorPtr& coeffs) {
    if (x->shape.empty() || coeffs->shape.size() != 1 || coeffs->shape[0] != x->shape[0]) {
        shape_fail("rowwise_scale", x, coeffs);
    }
    const int64_t batch = x->shape[0];
    const int64_t inner = x->size() / batch;
    auto out = Tensor::zeros(x->shape);
    for (int64_t b = 0; b < batch; ++b) {
        const double s = coeffs->values[b];
        const double* in = x->values.data() + b * inner;
        double* o = out->values.data() + b * inner;
        for (int64_t j = 0; j < inner; ++j) o[j] = in[j] * s;
    }
    check_finite(out, "rowwise_scale");
    out->requires_grad = want_grad(x, coeffs);
    if (out->requires_grad) {
        Graph::tape().record([x, coeffs, out, batch, inner] {
            if (out->grad.empty()) return;
            if (x->requires_grad) {
                x->ensure_grad();
                for (int64_t b = 0; b < batch; ++b) {
                    const double s = coeffs->values[b];
                    const double* g = out->grad.data() + b * inner;
                    double* gx = x->grad.data() + b * inner;
                    for (int64_t j = 0; j < inner; ++j) gx[j] += g[j] * s;
                }
            }
            if (coeffs->requires_grad) {
                coeffs->ensure_grad();
                for (int64_t b = 0; b < batch; ++b) {
                    const double* g = out->grad.data() + b * inner;
                    const double* in = x->values.data() + b * inner;
                    double acc = 0.0;
                    for (int64_t j = 0; j < inner; ++j) acc += g[j] * in[j];
                    coeffs->grad[b] += acc;
                }
            }
        });
    }
    return out;
}

TensorPtr conv2d(const TensorPtr& x, const TensorPtr& w, const TensorPtr& bias) {
    require_rank("conv2d", x, 4);
    require_rank("conv2d weight", w, 4);
    require_rank("conv2d bias", bias, 1);
    const int64_t batch = x->shape[0], ci = x->shape[1], h = x->shape[2], wd = x->shape[3];
    const int64_t co = w->shape[0], kh = w->shape[2], kw = w->shape[3];
    if (w->shape[1] != ci || bias->shape[0] != co) shape_fail("conv2d", x, w);
    if (kh > h || kw > wd) {
        throw ShapeError("conv2d: kernel larger than input " + x->shape_str());
    }
    const int64_t oh = h - kh + 1, ow = wd - kw + 1;
    auto out = Tensor::zeros({batch, co, oh, ow});

    for (int64_t b = 0; b < batch; ++b) {
        for (int64_t oc = 0; oc < co; ++oc) {
            double* obase = out->values.data() + ((b * co + oc) * oh) * ow;
            const double bv = bias->values[oc];
            for (int64_t i = 0; i < oh * ow; ++i) obase[i] = bv;
            for (int64_t ic = 0; ic < ci; ++ic) {
                const double* xbase = x->values.data() + ((b * ci + ic) * h) * wd;
                const double* wbase = w->values.data() + ((oc * ci + ic) * kh) * kw;
                for (int64_t r = 0; r < kh; ++r) {
                    for (int64_t c = 0; c < kw; ++c) {
                        const double wv = wbase[r * kw + c];
                        for (int64_t y = 0; y < oh; ++y) {
                            const double* xrow = xbase + (y + r) * wd + c;
                            double* orow = obase + y * ow;
                            for (int64_t z = 0; z < ow; ++z) orow[z] += wv * xrow[z];
                        }
                    }
                }
            }
        }
    }
    check_finite(out, "conv2d");
    out->requires_grad = grad_enabled() &&
                         (x->requires_grad || w->requires_grad || bias->requires_grad);
    if (out->requires_grad) {
        Graph::tape().record([x, w, bias, out, batch, ci, h, wd, co, kh, kw, oh, ow] {
            if (out->grad.empty()) return;
            if (x->requires_grad) x->ensure_grad();
            if (w->requires_grad) w->ensure_grad();
            if (bias->requires_grad) bias->ensure_grad();
            for (int64_t b = 0; b < batch; ++b) {
                for (int64_t oc = 0; oc < co; ++oc) {
                    const double* gbase = out->grad.data() + ((b * co + oc) * oh) * ow;
                    if (bias->requires_grad) {
                        double acc = 0.0;
                        for (int64_t i = 0; i < oh * ow; ++i) acc += gbase[i];
                        bias->grad[oc] += acc;
                    }
                    for (int64_t ic = 0; ic < ci; ++ic) {
                        const double* xbase = x->values.data() + ((b * ci + ic) * h) * wd;
                        const double* wbase = w->values.data() + ((oc * ci + ic) * kh) * kw;
                        double* gxbase =
                            x->requires_grad ? x->grad.data() + ((b * ci + ic) * h) * wd : nullptr;
                        double* gwbase =
                            w->requires_grad ? w->grad.data() + ((oc * ci + ic) * kh) * kw : nullptr;
                        for (int64_t r = 0; r < kh; ++r) {
                            for (int64_t c = 0; c < kw; ++c) {
                                const double wv = wbase[r * kw + c];
                                double wacc = 0.0;
                                for (int64_t y = 0; y < oh; ++y) {
                                    const double* grow = gbase + y * ow;
                                    const double* xrow = xbase + (y + r) * wd + c;
                                    if (gxbase) {
                                        double* gxrow = gxbase + (y + r) * wd + c;
                                        for (int64_t z = 0; z < ow; ++z) gxrow[z] += wv * grow[z];
                                    }
                                    if (gwbase) {
                                        for (int64_t z = 0; z < ow; ++z) wacc += xrow[z] * grow[z];
                                    }
                                }
                                if (gwbase) gwbase[r * kw + c] += wacc;
                            }
                        }
                    }
                }
            }
        });
    }
    return out;
}

TensorPtr max_pool(const TensorPtr& x, int64_t window) {
    require_rank("max_pool", x, 4);
    if (window < 1) throw ContractError("max_pool: window must be >= 1");
    const int64_t batch = x->shape[0], ch = x->shape[1], h = x->shape[2], w = x->shape[3];
    const int64_t oh = h / window, ow = w / window;
    if (oh == 0 || ow == 0) {
        throw ShapeError("max_pool: window exceeds input " + x->shape_str());
    }
    auto out = Tensor::zeros({batch, ch, oh, ow});
    auto argmax = std::make_shared<std::vector<int64_t>>(out->values.size());
    for (int64_t b = 0; b < batch; ++b) {
        for (int64_t c = 0; c < ch; ++c) {
            const double* xbase = x->values.data() + ((b * ch + c) * h) * w;
            const int64_t obase = ((b * ch + c) * oh) * ow;
            for (int64_t y = 0; y < oh; ++y) {
                for (int64_t z = 0; z < ow; ++z) {
                    double best = -std::numeric_limits<double>::infinity();
                    int64_t best_idx = 0;
                    for (int64_t r = 0; r < window; ++r) {
                        for (int64_t cc = 0; cc < window; ++cc) {
                            const int64_t idx = (y * window + r) * w + (z * window + cc);
                            if (xbase[idx] > best) {
                                best = xbase[idx];
                                best_idx = idx;
                            }
                        }
                    }
                    out->values[obase + y * ow + z] = best;
                    (*argmax)[obase + y * ow + z] = ((b * ch + c) * h) * w + best_idx;
                }
            }
        }
    }
    check_finite(out, "max_pool");
    out->requires_grad = want_grad(x);
    if (out->requires_grad) {
        Graph::tape().record([x, out, argmax] {
            if (out->grad.empty() || !x->requires_grad) return;
            x->ensure_grad();
            for (size_t i = 0; i < out->grad.size(); ++i) {
                x->grad[static_cast<size_t>((*argmax)[i])] += out->grad[i];
            }
        });
    }
    return out;
}

} // namespace adamixup
