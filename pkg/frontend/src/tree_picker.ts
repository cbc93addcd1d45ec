import type { HierarchyCode } from "./types.js";

// Tree model for the code picker. Offers exactly the codes the service
// returned for the level, nested by the parent relation, so a code from
// another level can never be selected.

export interface TreeNode {
  code: string;
  label: string | null;
  depth: number;
  children: TreeNode[];
}

export function buildTree(codes: HierarchyCode[]): TreeNode[] {
  const nodes = new Map<string, TreeNode>();
  for (const c of codes) {
    nodes.set(c.code, { code: c.code, label: c.label, depth: c.depth, children: [] });
  }
  const roots: TreeNode[] = [];
  for (const c of [...codes].sort((a, b) => a.code.localeCompare(b.code))) {
    const node = nodes.get(c.code)!;
    const parent = c.parent === null ? undefined : nodes.get(c.parent);
    if (parent) {
      parent.children.push(node);
    } else {
      roots.push(node);
    }
  }
  return roots;
}

export function flattenTree(roots: TreeNode[]): TreeNode[] {
  const out: TreeNode[] = [];
  const walk = (node: TreeNode) => {
    out.push(node);
    node.children.forEach(walk);
  };
  roots.forEach(walk);
  return out;
}

export function selectableCodes(codes: HierarchyCode[]): Set<string> {
  return new Set(codes.map((c) => c.code));
}

export function renderTreeOptions(roots: TreeNode[]): string {
  return flattenTree(roots)
    .map((node) => {
      const indent = " ".repeat((node.depth - 1) * 3);
      const label = node.label ? ` — ${escapeHtml(node.label)}` : "";
      return `<option value="${node.code}">${indent}${node.code}${label}</option>`;
    })
    .join("");
}

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}
