// Copyright (C) 2026 The posefuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "posefuse/hungarian.hpp"
#include "posefuse/skeleton.hpp"
#include "posefuse/types.hpp"

namespace posefuse {

/// Directed GCN adjacency; entry (i, j) is the outward weight from joint i
/// to joint j.
using Adjacency = DenseMatrix;

/// A(i, j) = max(H_i) * exp(-hops(i, j)) for i != j, A(i, i) = max(H_i).
Adjacency gcn_adjacency(const Tensor& heatmaps, const Skeleton& skeleton);

}  // namespace posefuse
