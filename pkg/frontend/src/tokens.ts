// client_token values make label submissions idempotent: retrying a failed
// POST with the same token can never double-count a judgment.

let counter = 0;

export function newClientToken(): string {
  const c = globalThis.crypto;
  if (c && typeof c.randomUUID === "function") {
    return c.randomUUID();
  }
  counter += 1;
  const noise = Math.random().toString(36).slice(2, 10);
  return `tok-${Date.now().toString(36)}-${counter}-${noise}`;
}
