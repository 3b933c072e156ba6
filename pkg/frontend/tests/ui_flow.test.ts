// Scripted sessions driving the console's view models against a real
// service instance (spawned as a subprocess). These are the exact modules
// the browser bundle runs; the DOM layer on top of them holds no logic.

import assert from "node:assert/strict";
import { spawn, type ChildProcess } from "node:child_process";
import http from "node:http";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import path from "node:path";
import { after, before, test } from "node:test";
import { fileURLToPath } from "node:url";

import { ApiClient, ApiError } from "../src/api.js";
import { ComposeModel } from "../src/compose.js";
import { ManageModel } from "../src/manage.js";
import { MemoryStorage, TokenStore } from "../src/tokens.js";

const REPO_ROOT = path.resolve(path.dirname(fileURLToPath(import.meta.url)), "..", "..");

let server: ChildProcess;
let baseUrl: string;

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function waitFor(check: () => Promise<boolean> | boolean, ms: number, what: string): Promise<void> {
  const deadline = Date.now() + ms;
  while (Date.now() < deadline) {
    if (await check()) return;
    await sleep(25);
  }
  throw new Error(`timed out waiting for ${what}`);
}

before(async () => {
  const dataDir = mkdtempSync(path.join(tmpdir(), "latebind-ui-"));
  server = spawn(
    "python3",
    [
      "-m", "latebind.cli", "serve",
      "--bind", "127.0.0.1:0",
      "--data", dataDir,
      "--base-url", "http://127.0.0.1:0",
      "--interval-floor", "0.25",
    ],
    {
      env: { ...process.env, PYTHONPATH: path.join(REPO_ROOT, "src") },
      stdio: ["ignore", "pipe", "pipe"],
    },
  );
  const port = await new Promise<number>((resolve, reject) => {
    let buffer = "";
    const timer = setTimeout(() => reject(new Error(`server did not start: ${buffer}`)), 15000);
    server.stdout!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
      const match = buffer.match(/listening on http:\/\/127\.0\.0\.1:(\d+)/);
      if (match) {
        clearTimeout(timer);
        resolve(Number(match[1]));
      }
    });
    server.stderr!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
    });
    server.on("exit", (code) => reject(new Error(`server exited early (${code}): ${buffer}`)));
  });
  baseUrl = `http://127.0.0.1:${port}`;
  await waitFor(async () => (await fetch(`${baseUrl}/healthz`)).ok, 5000, "health check");
});

after(() => {
  server.kill("SIGINT");
});

function freshModels() {
  const api = new ApiClient(baseUrl);
  const tokens = new TokenStore(new MemoryStorage());
  const compose = new ComposeModel(api, tokens, () => {});
  const manage = new ManageModel(api, tokens, () => {});
  return { api, tokens, compose, manage };
}

function snippetSrcs(snippet: string): string[] {
  return [...snippet.matchAll(/src="([^"]+)"/g)].map((m) => m[1] as string);
}

test("empty selection cannot bind", () => {
  const { compose } = freshModels();
  compose.setText("nothing selected yet");
  assert.equal(compose.canBind, false);
  compose.setSelection(0, 7);
  assert.equal(compose.canBind, true);
  compose.setSelection(3, 3);
  assert.equal(compose.canBind, false);
});

test("bind -> snippet -> recipient open -> editor locks with revocation notice", async () => {
  const { compose, manage } = freshModels();
  compose.setText("Dear Jhon, see you at six.");
  compose.settings.kind = "continuous-edit";
  compose.settings.afterFirstViewDays = null;
  compose.setSelection(5, 9); // the misspelled name

  const created = await compose.bind();
  assert.equal(compose.selectionText, "Jhon");
  // the copied snippet references exactly the bound region's image segments
  assert.deepEqual(snippetSrcs(created.html_snippet), created.image_urls);

  manage.loadFromStore();
  let entry = await manage.refresh(created.content_id);
  assert.equal(entry.editorLocked, false);
  assert.equal(entry.doc?.view_count, 0);

  // sender fixes the typo while the email is still unopened
  await manage.edit(created.content_id, "John");
  entry = manage.entry(created.content_id)!;
  assert.equal(entry.doc?.revision_count, 2);

  // recipient opens the email: a tokenless image download
  const imageUrl = created.image_urls[0] as string;
  const recipientFetch = await fetch(imageUrl);
  assert.equal(recipientFetch.status, 200);
  assert.equal(recipientFetch.headers.get("cache-control"), "no-cache, no-store, max-age=0");

  // the next poll observes the lock
  entry = await manage.refresh(created.content_id);
  assert.equal(entry.doc?.view_count, 1);
  assert.equal(entry.editorLocked, true);
  assert.match(entry.revocationNotice ?? "", /recipient opened/);

  // and edits are refused for good
  await assert.rejects(
    () => manage.edit(created.content_id, "too late"),
    (err: unknown) => err instanceof ApiError && err.status === 403,
  );
  assert.equal(manage.entry(created.content_id)!.editorLocked, true);
});

test("auto-scrub suggestions highlight sensitive spans before binding", async () => {
  const { compose } = freshModels();
  compose.setText("my card is 4111 1111 1111 1111, call 412-555-0101");
  const spans = await compose.suggest();
  const categories = spans.map((s) => s.category).sort();
  assert.deepEqual(categories, ["credit-card", "phone"]);

  compose.applySuggestion(spans[0]!);
  assert.equal(compose.selectionText, spans[0]!.matched_text);
  compose.settings.kind = "self-destruct";
  compose.settings.maxViews = 1;
  const created = await compose.bind();
  assert.ok(created.content_id.length === 32);
});

test("destroy swaps the preview image for the removal notice", async () => {
  const { compose, manage } = freshModels();
  compose.setText("volatile thing");
  compose.settings.kind = "static";
  compose.settings.afterFirstViewDays = null;
  compose.setSelection(0, 8);
  const created = await compose.bind();
  const imageUrl = created.image_urls[0] as string;
  const before = Buffer.from(await (await fetch(imageUrl)).arrayBuffer());

  manage.loadFromStore();
  await manage.destroy(created.content_id);
  const entry = manage.entry(created.content_id)!;
  assert.equal(entry.doc?.status, "deleted");
  assert.equal(entry.editorLocked, true);

  const afterBytes = Buffer.from(await (await fetch(imageUrl)).arrayBuffer());
  assert.notDeepEqual(afterBytes, before); // notification replaced the content
});

test("dashboard interval change shows up in the source call log within 2 intervals", async () => {
  let calls = 0;
  const source = http.createServer((_req, res) => {
    calls += 1;
    const body = JSON.stringify({ kwh: 23 + calls });
    res.writeHead(200, { "Content-Type": "application/json", "Content-Length": body.length });
    res.end(body);
  });
  await new Promise<void>((resolve) => source.listen(0, "127.0.0.1", resolve));
  const address = source.address();
  assert.ok(address && typeof address === "object");
  const sourceUrl = `http://127.0.0.1:${address.port}/report`;

  try {
    const { compose, manage } = freshModels();
    compose.settings.kind = "dashboard";
    compose.settings.binding = {
      type: "http-json",
      url: sourceUrl,
      path: "kwh",
      template: "This week: {value} kWh",
      interval: 30, // slow: one immediate refresh, then nothing for a while
    };
    assert.equal(compose.canBind, true);
    const created = await compose.bind();

    await waitFor(() => calls >= 1, 5000, "initial refresh");
    const baseline = calls;
    await sleep(700);
    assert.equal(calls, baseline); // 30s cadence: nothing else yet

    // sender tightens the refresh interval from the manage panel
    manage.loadFromStore();
    const changedAt = Date.now();
    await manage.setBinding(created.content_id, {
      type: "http-json",
      url: sourceUrl,
      path: "kwh",
      template: "This week: {value} kWh",
      interval: 0.25,
    });
    await waitFor(() => calls > baseline, 2 * 250 + 400, "refresh after interval change");
    assert.ok(Date.now() - changedAt <= 2 * 250 + 450);

    // steady state at the new cadence: several refreshes per second-ish window
    const beforeWindow = calls;
    await sleep(1100);
    const during = calls - beforeWindow;
    assert.ok(during >= 2, `expected >=2 refreshes in 1.1s at 250ms cadence, saw ${during}`);

    const entry = manage.entry(created.content_id)!;
    await manage.refresh(created.content_id);
    assert.equal(entry.doc?.binding?.interval, 0.25);
  } finally {
    source.close();
  }
});
