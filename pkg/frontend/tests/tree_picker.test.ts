import { describe, expect, it } from "vitest";

import { buildTree, flattenTree, renderTreeOptions, selectableCodes } from "../src/tree_picker.js";
import type { HierarchyCode } from "../src/types.js";

const codes: HierarchyCode[] = [
  { code: "L", label: "Steam systems", parent: null, depth: 1 },
  { code: "LA", label: null, parent: "L", depth: 2 },
  { code: "LAA", label: null, parent: "LA", depth: 3 },
  { code: "LAB", label: null, parent: "LA", depth: 3 },
  { code: "M", label: null, parent: null, depth: 1 },
];

describe("tree picker", () => {
  it("nests by the parent relation", () => {
    const roots = buildTree(codes);
    expect(roots.map((r) => r.code)).toEqual(["L", "M"]);
    const la = roots[0]!.children[0]!;
    expect(la.code).toBe("LA");
    expect(la.children.map((c) => c.code)).toEqual(["LAA", "LAB"]);
  });

  it("flattens depth-first so options read as an indented tree", () => {
    const flat = flattenTree(buildTree(codes)).map((n) => n.code);
    expect(flat).toEqual(["L", "LA", "LAA", "LAB", "M"]);
  });

  it("offers exactly the codes the service returned", () => {
    const options = renderTreeOptions(buildTree(codes));
    const values = [...options.matchAll(/value="([^"]+)"/g)].map((m) => m[1]);
    expect(new Set(values)).toEqual(selectableCodes(codes));
    // a code from another level cannot be selected: it is simply absent
    expect(values).not.toContain("QA");
  });

  it("labels appear next to codes", () => {
    const options = renderTreeOptions(buildTree(codes));
    expect(options).toContain("L — Steam systems");
  });
});
