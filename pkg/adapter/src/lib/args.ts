/** Minimal --flag value parser for the adapter CLIs. */
export function parseArgs(
  argv: string[],
  spec: { required: string[]; optional?: string[]; usage: string }
): Record<string, string> {
  const known = new Set([...spec.required, ...(spec.optional ?? [])]);
  const out: Record<string, string> = {};
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) {
      throw new UsageError(`unexpected argument ${arg}\n${spec.usage}`);
    }
    const name = arg.slice(2);
    if (name === "help") throw new UsageError(spec.usage);
    if (!known.has(name)) {
      throw new UsageError(`unknown flag --${name}\n${spec.usage}`);
    }
    const value = argv[i + 1];
    if (value === undefined) {
      throw new UsageError(`flag --${name} needs a value\n${spec.usage}`);
    }
    out[name] = value;
    i++;
  }
  for (const req of spec.required) {
    if (!(req in out)) {
      throw new UsageError(`missing required flag --${req}\n${spec.usage}`);
    }
  }
  return out;
}

export class UsageError extends Error {}

export function runCli(fn: () => Promise<void> | void): void {
  Promise.resolve()
    .then(fn)
    .catch((e) => {
      console.error(e instanceof UsageError ? e.message : `error: ${(e as Error).message}`);
      process.exit(e instanceof UsageError ? 2 : 1);
    });
}
