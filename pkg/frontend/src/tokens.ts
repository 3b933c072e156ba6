// Edit tokens live only in browser storage, keyed by content id. Losing
// them means losing edit rights — the server keeps hashes, not tokens.

import type { ContentKind } from "./api.js";

export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export interface OwnedContent {
  contentId: string;
  token: string;
  kind: ContentKind;
  label: string;
  createdAt: number;
}

const INDEX_KEY = "latebind.contents";

export class TokenStore {
  constructor(private readonly storage: KeyValueStore) {}

  private readIndex(): string[] {
    const raw = this.storage.getItem(INDEX_KEY);
    if (!raw) return [];
    try {
      const parsed = JSON.parse(raw) as unknown;
      return Array.isArray(parsed) ? (parsed as string[]) : [];
    } catch {
      return [];
    }
  }

  private writeIndex(ids: string[]): void {
    this.storage.setItem(INDEX_KEY, JSON.stringify(ids));
  }

  remember(entry: OwnedContent): void {
    this.storage.setItem(`latebind.content.${entry.contentId}`, JSON.stringify(entry));
    const ids = this.readIndex();
    if (!ids.includes(entry.contentId)) {
      ids.push(entry.contentId);
      this.writeIndex(ids);
    }
  }

  get(contentId: string): OwnedContent | null {
    const raw = this.storage.getItem(`latebind.content.${contentId}`);
    if (!raw) return null;
    try {
      return JSON.parse(raw) as OwnedContent;
    } catch {
      return null;
    }
  }

  tokenFor(contentId: string): string | null {
    return this.get(contentId)?.token ?? null;
  }

  list(): OwnedContent[] {
    const out: OwnedContent[] = [];
    for (const id of this.readIndex()) {
      const entry = this.get(id);
      if (entry) out.push(entry);
    }
    return out;
  }

  forget(contentId: string): void {
    this.storage.removeItem(`latebind.content.${contentId}`);
    this.writeIndex(this.readIndex().filter((id) => id !== contentId));
  }
}

/** In-memory stand-in used by tests and non-browser environments. */
export class MemoryStorage implements KeyValueStore {
  private data = new Map<string, string>();

  getItem(key: string): string | null {
    return this.data.has(key) ? (this.data.get(key) as string) : null;
  }

  setItem(key: string, value: string): void {
    this.data.set(key, value);
  }

  removeItem(key: string): void {
    this.data.delete(key);
  }
}
