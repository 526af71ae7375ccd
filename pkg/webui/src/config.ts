/** Deployment configuration injected as a single JSON block in index.html. */

export interface UiConfig {
  baseUrl: string;
}

export function readConfig(doc: Document = document): UiConfig {
  const node = doc.getElementById("sandbox-config");
  if (node?.textContent) {
    try {
      const parsed = JSON.parse(node.textContent) as Partial<UiConfig>;
      return { baseUrl: parsed.baseUrl ?? "" };
    } catch {
      // fall through to the same-origin default
    }
  }
  return { baseUrl: "" };
}
