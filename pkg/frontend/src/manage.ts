// Manage-panel view model: live status for every owned content, inline
// editing until revocation, destroy, and binding reconfiguration. State is
// always derived from API reads plus the token store, never invented.

import { ApiClient, ApiError, type BindingInput, type StatusDoc } from "./api.js";
import { TokenStore } from "./tokens.js";

export interface ManagedEntry {
  contentId: string;
  kind: string;
  label: string;
  doc: StatusDoc | null;
  editorLocked: boolean;
  revocationNotice: string | null;
  lastError: string | null;
}

type TimerHandle = ReturnType<typeof setInterval>;

export class ManageModel {
  entries: ManagedEntry[] = [];
  private timer: TimerHandle | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly tokens: TokenStore,
    private readonly onChange: () => void = () => {},
  ) {}

  loadFromStore(): void {
    this.entries = this.tokens.list().map((owned) => ({
      contentId: owned.contentId,
      kind: owned.kind,
      label: owned.label,
      doc: null,
      editorLocked: false,
      revocationNotice: null,
      lastError: null,
    }));
    this.onChange();
  }

  entry(contentId: string): ManagedEntry | undefined {
    return this.entries.find((e) => e.contentId === contentId);
  }

  private applyDoc(entry: ManagedEntry, doc: StatusDoc): void {
    entry.doc = doc;
    entry.lastError = null;
    const revoked = doc.token_status === "revoked";
    entry.editorLocked = revoked || doc.status !== "live";
    entry.revocationNotice = revoked
      ? "recipient opened this email; editing is permanently locked"
      : null;
  }

  async refresh(contentId: string): Promise<ManagedEntry> {
    const entry = this.entry(contentId);
    const token = this.tokens.tokenFor(contentId);
    if (!entry || !token) throw new Error(`not an owned content: ${contentId}`);
    try {
      this.applyDoc(entry, await this.api.status(contentId, token));
    } catch (err) {
      entry.lastError = err instanceof Error ? err.message : String(err);
    }
    this.onChange();
    return entry;
  }

  async refreshAll(): Promise<void> {
    await Promise.all(this.entries.map((e) => this.refresh(e.contentId).catch(() => undefined)));
  }

  startPolling(intervalMs = 5000): void {
    if (this.timer !== null) return;
    this.timer = setInterval(() => {
      void this.refreshAll();
    }, intervalMs);
  }

  stopPolling(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  async edit(contentId: string, text: string): Promise<void> {
    const entry = this.entry(contentId);
    const token = this.tokens.tokenFor(contentId);
    if (!entry || !token) throw new Error(`not an owned content: ${contentId}`);
    try {
      await this.api.patchText(contentId, token, text);
      await this.refresh(contentId);
    } catch (err) {
      if (err instanceof ApiError && err.status === 403) {
        // the server told us the recipient opened it; lock immediately
        entry.editorLocked = true;
        entry.revocationNotice = "recipient opened this email; editing is permanently locked";
        this.onChange();
      }
      throw err;
    }
  }

  async destroy(contentId: string): Promise<void> {
    const token = this.tokens.tokenFor(contentId);
    if (!token) throw new Error(`not an owned content: ${contentId}`);
    await this.api.destroy(contentId, token);
    await this.refresh(contentId);
  }

  async setBinding(contentId: string, binding: BindingInput): Promise<void> {
    const token = this.tokens.tokenFor(contentId);
    if (!token) throw new Error(`not an owned content: ${contentId}`);
    await this.api.registerBinding(contentId, token, binding);
    await this.refresh(contentId);
  }
}
