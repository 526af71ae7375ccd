/** Hash-based routes, one per page the sandbox exposes. */

export type ViewRoute =
  | { name: "login" }
  | { name: "home"; experimentId: string }
  | { name: "explore"; experimentId: string }
  | { name: "hashtag"; experimentId: string; tag: string }
  | { name: "search"; experimentId: string; query: string }
  | { name: "thread"; experimentId: string; postSeq: number }
  | { name: "notifications"; filter: string }
  | { name: "account_settings" }
  | { name: "experiment_admin"; experimentId: string }
  | { name: "agent_admin"; experimentId: string };

export function parseRoute(hash: string): ViewRoute {
  const parts = hash.replace(/^#\/?/, "").split("/").filter(Boolean);
  if (parts.length === 0 || parts[0] === "login") return { name: "login" };
  if (parts[0] === "notifications") {
    return { name: "notifications", filter: parts[1] ?? "all" };
  }
  if (parts[0] === "account") return { name: "account_settings" };
  if (parts[0] === "e" && parts.length >= 2) {
    const experimentId = parts[1];
    switch (parts[2] ?? "home") {
      case "home": return { name: "home", experimentId };
      case "explore": return { name: "explore", experimentId };
      case "tag": return { name: "hashtag", experimentId, tag: decodeURIComponent(parts[3] ?? "") };
      case "search": return { name: "search", experimentId, query: decodeURIComponent(parts[3] ?? "") };
      case "thread": return { name: "thread", experimentId, postSeq: Number(parts[3] ?? 0) };
      case "admin": return { name: "experiment_admin", experimentId };
      case "agents": return { name: "agent_admin", experimentId };
    }
  }
  return { name: "login" };
}

export function routeHash(route: ViewRoute): string {
  switch (route.name) {
    case "login": return "#/login";
    case "home": return `#/e/${route.experimentId}/home`;
    case "explore": return `#/e/${route.experimentId}/explore`;
    case "hashtag": return `#/e/${route.experimentId}/tag/${encodeURIComponent(route.tag)}`;
    case "search": return `#/e/${route.experimentId}/search/${encodeURIComponent(route.query)}`;
    case "thread": return `#/e/${route.experimentId}/thread/${route.postSeq}`;
    case "notifications": return `#/notifications/${route.filter}`;
    case "account_settings": return "#/account";
    case "experiment_admin": return `#/e/${route.experimentId}/admin`;
    case "agent_admin": return `#/e/${route.experimentId}/agents`;
  }
}
