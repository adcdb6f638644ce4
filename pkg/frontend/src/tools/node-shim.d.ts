// Minimal ambient typings for the one node builtin the synthetic-session
// tool touches; keeps the browser build free of @types/node.
declare module "node:fs" {
  export function readFileSync(fd: number | string, encoding: string): string;
}
