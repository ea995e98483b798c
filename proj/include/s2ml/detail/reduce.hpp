#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

namespace s2ml {

/// How row-wise reductions inside the problem oracles are executed.
struct ExecutionPolicy {
    std::size_t threads = 1;
    /// Fixed-shape pairwise reduction: results do not depend on `threads`.
    bool deterministic = false;
};

namespace detail {

/// Neumaier compensated sum.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) noexcept {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            carry += (sum - t) + x;
        else
            carry += (x - t) + sum;
        sum = t;
    }
    void merge(const CompensatedSum& o) noexcept {
        add(o.sum);
        carry += o.carry;
    }
    double value() const noexcept { return sum + carry; }
};

/// Folds a left-to-right stream of leaves into the perfect binary tree over
/// them (missing right leaves act as identity). The shape depends only on
/// the number of leaves.
template <class Acc, class Merge>
class TreeReducer {
public:
    explicit TreeReducer(Merge merge) : merge_(std::forward<Merge>(merge)) {}

    void push(Acc leaf) { push_at(std::move(leaf), 0); }

    // A node already reduced over 2^level aligned leaves.
    void push_at(Acc node, unsigned level) {
        while (!stack_.empty() && stack_.back().second == level) {
            merge_(stack_.back().first, node);
            node = std::move(stack_.back().first);
            stack_.pop_back();
            ++level;
        }
        stack_.emplace_back(std::move(node), level);
    }

    std::optional<Acc> finish() {
        if (stack_.empty()) return std::nullopt;
        Acc right = std::move(stack_.back().first);
        stack_.pop_back();
        while (!stack_.empty()) {
            merge_(stack_.back().first, right);
            right = std::move(stack_.back().first);
            stack_.pop_back();
        }
        return right;
    }

private:
    Merge merge_;
    std::vector<std::pair<Acc, unsigned>> stack_;
};

/// Reduces `body(acc, begin, end)` over [0, count).
///
/// Deterministic mode cuts the range into fixed blocks of `block` items and
/// combines block partials with the tree above. Workers own aligned
/// power-of-two runs of blocks, so the tree is the same for any thread count.
/// Otherwise each worker reduces one contiguous chunk and chunks are merged in
/// order.
template <class Acc, class Make, class Body, class Merge>
Acc reduce_range(std::size_t count, const ExecutionPolicy& policy, std::size_t block, Make make,
                 Body body, Merge merge) {
    const std::size_t threads = std::max<std::size_t>(1, policy.threads);

    if (!policy.deterministic) {
        const std::size_t workers = std::min(threads, std::max<std::size_t>(1, count / 1024));
        if (workers == 1) {
            Acc acc = make();
            body(acc, 0, count);
            return acc;
        }
        std::vector<Acc> partial;
        partial.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) partial.push_back(make());
        const std::size_t chunk = (count + workers - 1) / workers;
        {
            std::vector<std::jthread> pool;
            for (std::size_t w = 1; w < workers; ++w)
                pool.emplace_back([&, w] {
                    body(partial[w], std::min(count, w * chunk), std::min(count, (w + 1) * chunk));
                });
            body(partial[0], 0, std::min(count, chunk));
        }
        for (std::size_t w = 1; w < workers; ++w) merge(partial[0], partial[w]);
        return std::move(partial[0]);
    }

    block = std::max<std::size_t>(1, block);
    const std::size_t n_blocks = (count + block - 1) / block;
    if (n_blocks == 0) return make();
    const std::size_t padded = std::bit_ceil(n_blocks);
    std::size_t workers = std::bit_floor(std::min(threads, n_blocks));
    const std::size_t span = padded / workers;

    auto reduce_blocks = [&](std::size_t first_block) -> std::optional<Acc> {
        TreeReducer<Acc, Merge&> tree(merge);
        const std::size_t last = std::min(n_blocks, first_block + span);
        for (std::size_t b = first_block; b < last; ++b) {
            Acc leaf = make();
            body(leaf, b * block, std::min(count, (b + 1) * block));
            tree.push(std::move(leaf));
        }
        return tree.finish();
    };

    std::vector<std::optional<Acc>> partial(workers);
    if (workers == 1) {
        partial[0] = reduce_blocks(0);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 1; w < workers; ++w)
            pool.emplace_back([&, w] { partial[w] = reduce_blocks(w * span); });
        partial[0] = reduce_blocks(0);
    }

    const auto level = static_cast<unsigned>(std::countr_zero(span));
    TreeReducer<Acc, Merge&> top(merge);
    for (auto& p : partial)
        if (p) top.push_at(std::move(*p), level);
    return *top.finish();
}

}  // namespace detail
}  // namespace s2ml
