/** Shared test utilities (not collected by vitest). */

/** Every number and string reachable in the given payloads, rendered the way
 * the dashboard would display them. */
export function payloadTokens(served: readonly unknown[]): Set<string> {
  const tokens = new Set<string>();
  const walk = (node: unknown): void => {
    if (typeof node === "number") tokens.add(String(node));
    else if (typeof node === "string") tokens.add(node);
    else if (Array.isArray(node)) node.forEach(walk);
    else if (node && typeof node === "object") Object.values(node).forEach(walk);
  };
  served.forEach(walk);
  return tokens;
}

export function testid(id: string): HTMLElement {
  const el = document.querySelector(`[data-testid="${id}"]`);
  if (!el) throw new Error(`missing element ${id}`);
  return el as HTMLElement;
}

export function input(id: string): HTMLInputElement {
  return testid(id) as unknown as HTMLInputElement;
}

export function select(id: string): HTMLSelectElement {
  return testid(id) as unknown as HTMLSelectElement;
}
