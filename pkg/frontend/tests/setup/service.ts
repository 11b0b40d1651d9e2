// Global setup: start the real rec-service (mock provider) once for the whole
// test run and hand its URL to the suites via vitest's provide/inject.

import { spawn, type ChildProcess } from 'node:child_process';
import { createServer } from 'node:net';
import { fileURLToPath } from 'node:url';
import path from 'node:path';
import { MOCK_COMPLETE, MOCK_GENERATE } from './mock.js';

declare module 'vitest' {
  export interface ProvidedContext {
    serviceUrl: string;
  }
}

const REPO_ROOT = path.resolve(fileURLToPath(new URL('.', import.meta.url)), '../../..');

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = createServer();
    server.once('error', reject);
    server.listen(0, '127.0.0.1', () => {
      const address = server.address();
      if (address === null || typeof address === 'string') {
        reject(new Error('no port assigned'));
        return;
      }
      server.close(() => resolve(address.port));
    });
  });
}

async function waitForHealth(url: string, proc: ChildProcess, logs: string[]): Promise<void> {
  const deadline = Date.now() + 30000;
  while (Date.now() < deadline) {
    if (proc.exitCode !== null) break;
    try {
      const res = await fetch(url);
      if (res.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error(`service did not come up at ${url}\n${logs.join('')}`);
}

interface SetupContext {
  provide(key: 'serviceUrl', value: string): void;
}

export default async function setup({ provide }: SetupContext): Promise<() => void> {
  const port = await freePort();
  const logs: string[] = [];
  const proc = spawn(
    'python3',
    [
      '-m', 'colorrec.cli', 'serve',
      '--host', '127.0.0.1',
      '--port', String(port),
      '--corpus', 'tests/fixtures/completion/corpus.jsonl',
      '--splits', 'tests/fixtures/completion/splits.json',
      '--pairs', 'tests/fixtures/generation/pairs.jsonl',
      '--mock-complete', MOCK_COMPLETE,
      '--mock-generate', MOCK_GENERATE.join(','),
      '--cors', 'http://localhost:3000',
    ],
    { cwd: REPO_ROOT, stdio: ['ignore', 'pipe', 'pipe'] },
  );
  proc.stdout?.on('data', (chunk: Buffer) => logs.push(chunk.toString()));
  proc.stderr?.on('data', (chunk: Buffer) => logs.push(chunk.toString()));

  const base = `http://127.0.0.1:${port}/v1`;
  await waitForHealth(`${base}/health`, proc, logs);
  provide('serviceUrl', base);
  return () => {
    proc.kill('SIGTERM');
  };
}
