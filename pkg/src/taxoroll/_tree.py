"""Numba kernels for decision-tree building and forest voting.

Trees split on integer count thresholds (``count <= k``), minimizing
weighted Gini impurity over a random feature subset. The builder works on
a CSC layout so evaluating a feature inside a node costs only the node's
nonzero entries for that feature (token counts are overwhelmingly zero);
zero-bucket class counts fall out of the node's class histogram. All
randomness derives from a per-tree seed set at the top of the kernel, so
results are independent of thread scheduling.
"""

import numpy as np
from numba import njit

NO_FEATURE = -1


@njit(cache=True, nogil=True)
def build_tree(
    col_indptr,
    col_rows,
    col_vals,
    y,
    n_rows,
    n_classes,
    max_features,
    max_depth,
    min_leaf,
    seed,
    max_val,
):
    """Grow one tree on a bootstrap sample and return flat node arrays.

    The feature matrix arrives as CSC arrays; ``max_val`` is its largest
    count. Returns (feature, threshold, left, right, leaf_class,
    leaf_count, n_nodes). ``feature[i] == NO_FEATURE`` marks a leaf;
    ``leaf_class`` holds the bootstrap-weighted majority class id (lowest
    id wins ties) and ``leaf_count`` the bootstrap copies in the node.
    """
    n_feat = col_indptr.shape[0] - 1
    np.random.seed(seed)

    # bootstrap with replacement, size n, kept as multiplicities
    mult = np.zeros(n_rows, dtype=np.int32)
    for _ in range(n_rows):
        mult[np.random.randint(0, n_rows)] += 1

    # distinct sampled rows, ascending for determinism
    n_distinct = 0
    for r in range(n_rows):
        if mult[r] > 0:
            n_distinct += 1
    idx = np.empty(n_distinct, dtype=np.int32)
    j = 0
    for r in range(n_rows):
        if mult[r] > 0:
            idx[j] = r
            j += 1

    cap = 2 * n_rows + 1
    feature = np.full(cap, NO_FEATURE, dtype=np.int32)
    threshold = np.zeros(cap, dtype=np.int32)
    left = np.full(cap, -1, dtype=np.int32)
    right = np.full(cap, -1, dtype=np.int32)
    leaf_class = np.full(cap, -1, dtype=np.int32)
    leaf_count = np.zeros(cap, dtype=np.int32)

    # scratch: node-membership stamps, per-row values of the split feature
    in_node = np.full(n_rows, -1, dtype=np.int64)
    val_stamp = np.full(n_rows, -1, dtype=np.int64)
    row_val = np.zeros(n_rows, dtype=np.int32)
    stamp = 0

    feat_perm = np.arange(n_feat, dtype=np.int32)
    nzhist = np.zeros((max_val + 1, n_classes), dtype=np.int64)
    nzsum = np.zeros(n_classes, dtype=np.int64)
    chist = np.zeros(n_classes, dtype=np.int64)
    present = np.empty(n_classes, dtype=np.int32)
    left_acc = np.zeros(n_classes, dtype=np.int64)

    # DFS stack of (node, start, end, depth, size-in-copies)
    stack_node = np.empty(cap, dtype=np.int32)
    stack_start = np.empty(cap, dtype=np.int32)
    stack_end = np.empty(cap, dtype=np.int32)
    stack_depth = np.empty(cap, dtype=np.int32)
    stack_size = np.empty(cap, dtype=np.int64)
    stack_node[0] = 0
    stack_start[0] = 0
    stack_end[0] = n_distinct
    stack_depth[0] = 0
    stack_size[0] = n_rows
    top = 1
    n_nodes = 1

    while top > 0:
        top -= 1
        node = stack_node[top]
        start = stack_start[top]
        end = stack_end[top]
        depth = stack_depth[top]
        size = stack_size[top]

        # stamp membership, build class histogram (bootstrap-weighted)
        stamp += 1
        n_present = 0
        for i in range(start, end):
            r = idx[i]
            in_node[r] = stamp
            c = y[r]
            if chist[c] == 0:
                present[n_present] = c
                n_present += 1
            chist[c] += mult[r]
        best_c = n_classes
        best_n = 0
        for j2 in range(n_present):
            c = present[j2]
            if chist[c] > best_n or (chist[c] == best_n and c < best_c):
                best_n = chist[c]
                best_c = c
        leaf_class[node] = best_c
        leaf_count[node] = size

        is_leaf = (
            n_present <= 1
            or (max_depth >= 0 and depth >= max_depth)
            or size < 2 * min_leaf
        )

        best_feat = NO_FEATURE
        best_thr = 0
        best_score = -1.0
        if not is_leaf:
            for j2 in range(max_features):
                k = j2 + np.random.randint(0, n_feat - j2)
                tmp = feat_perm[j2]
                feat_perm[j2] = feat_perm[k]
                feat_perm[k] = tmp

            for j2 in range(max_features):
                f = feat_perm[j2]
                # histogram of nonzero values inside the node
                vmax = 0
                for e in range(col_indptr[f], col_indptr[f + 1]):
                    r = col_rows[e]
                    if in_node[r] == stamp:
                        v = col_vals[e]
                        m = mult[r]
                        nzhist[v, y[r]] += m
                        nzsum[y[r]] += m
                        if v > vmax:
                            vmax = v
                if vmax > 0:
                    # threshold scan; the k=0 bucket is node minus nonzeros
                    nl = 0
                    for j3 in range(n_present):
                        c = present[j3]
                        left_acc[c] = chist[c] - nzsum[c]
                        nl += left_acc[c]
                    k = 0
                    while k < vmax:
                        if k > 0:
                            for j3 in range(n_present):
                                c = present[j3]
                                left_acc[c] += nzhist[k, c]
                                nl += nzhist[k, c]
                        nr = size - nl
                        if nl >= min_leaf and nr >= min_leaf:
                            sl = 0.0
                            sr = 0.0
                            for j3 in range(n_present):
                                c = present[j3]
                                lc = left_acc[c]
                                rc = chist[c] - lc
                                sl += lc * lc
                                sr += rc * rc
                            score = sl / nl + sr / nr
                            if score > best_score:
                                best_score = score
                                best_feat = f
                                best_thr = k
                        k += 1
                    # clear touched histogram entries
                    for e in range(col_indptr[f], col_indptr[f + 1]):
                        r = col_rows[e]
                        if in_node[r] == stamp:
                            nzhist[col_vals[e], y[r]] = 0
                            nzsum[y[r]] = 0

        if best_feat == NO_FEATURE:
            for j2 in range(n_present):
                chist[present[j2]] = 0
            continue

        for j2 in range(n_present):
            chist[present[j2]] = 0

        # fetch the winning feature's values, then partition the segment
        for e in range(col_indptr[best_feat], col_indptr[best_feat + 1]):
            r = col_rows[e]
            if in_node[r] == stamp:
                val_stamp[r] = stamp
                row_val[r] = col_vals[e]

        lo = start
        hi = end - 1
        left_size = 0
        while lo <= hi:
            r = idx[lo]
            v = row_val[r] if val_stamp[r] == stamp else 0
            if v <= best_thr:
                left_size += mult[r]
                lo += 1
            else:
                idx[lo] = idx[hi]
                idx[hi] = r
                hi -= 1
        mid = lo

        feature[node] = best_feat
        threshold[node] = best_thr
        left_id = n_nodes
        right_id = n_nodes + 1
        n_nodes += 2
        left[node] = left_id
        right[node] = right_id
        # push right first so the left child is processed next (DFS order)
        stack_node[top] = right_id
        stack_start[top] = mid
        stack_end[top] = end
        stack_depth[top] = depth + 1
        stack_size[top] = size - left_size
        top += 1
        stack_node[top] = left_id
        stack_start[top] = start
        stack_end[top] = mid
        stack_depth[top] = depth + 1
        stack_size[top] = left_size
        top += 1

    return feature, threshold, left, right, leaf_class, leaf_count, n_nodes


@njit(cache=True, nogil=True)
def forest_votes(X, feature, threshold, left, right, leaf_class, tree_roots, n_classes):
    """Vote counts per (sample, class) across all trees.

    ``X`` is dense row-major; tree arrays are concatenated with
    ``tree_roots`` holding each tree's root offset. Each tree casts one
    vote: its leaf's majority class.
    """
    n = X.shape[0]
    n_trees = tree_roots.shape[0]
    votes = np.zeros((n, n_classes), dtype=np.int32)
    for i in range(n):
        for t in range(n_trees):
            node = tree_roots[t]
            while feature[node] != NO_FEATURE:
                if X[i, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            votes[i, leaf_class[node]] += 1
    return votes
