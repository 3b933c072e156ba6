// Compose-panel view model: select a region of pasted text, pick a kind and
// policy, optionally accept auto-scrub suggestions, then bind. DOM-free so
// the same logic runs under tests.

import {
  ApiClient,
  type BindingInput,
  type ContentKind,
  type CreatedContent,
  type PolicyInput,
  type ScrubSpan,
} from "./api.js";
import { TokenStore } from "./tokens.js";

const DAY_SECONDS = 86_400;

export interface ComposeSettings {
  kind: ContentKind;
  kt: boolean;
  maxViews: number | null;
  afterFirstViewDays: number | null;
  expiresAt: number | null;
  includeAlt: boolean;
  altText: string;
  binding: BindingInput | null;
}

export class ComposeModel {
  text = "";
  selectionStart = 0;
  selectionEnd = 0;
  suggestions: ScrubSpan[] = [];
  lastResult: CreatedContent | null = null;
  error: string | null = null;
  busy = false;

  settings: ComposeSettings = {
    kind: "self-destruct",
    kt: false,
    maxViews: null,
    afterFirstViewDays: 3,
    expiresAt: null,
    includeAlt: false,
    altText: "",
    binding: null,
  };

  constructor(
    private readonly api: ApiClient,
    private readonly tokens: TokenStore,
    private readonly onChange: () => void = () => {},
  ) {}

  setText(text: string): void {
    this.text = text;
    this.suggestions = [];
    this.setSelection(0, 0);
  }

  setSelection(start: number, end: number): void {
    const max = this.text.length;
    this.selectionStart = Math.max(0, Math.min(start, max));
    this.selectionEnd = Math.max(this.selectionStart, Math.min(end, max));
    this.onChange();
  }

  get selectionText(): string {
    return this.text.slice(this.selectionStart, this.selectionEnd);
  }

  /** Binding is only possible with a region selected (or a data binding configured). */
  get canBind(): boolean {
    if (this.busy) return false;
    if (this.settings.kind === "dashboard" || this.settings.kind === "web-reference") {
      return this.settings.binding !== null;
    }
    return this.selectionText.length > 0;
  }

  policy(): PolicyInput {
    const policy: PolicyInput = {};
    if (this.settings.maxViews !== null) policy.max_views = this.settings.maxViews;
    if (this.settings.afterFirstViewDays !== null) {
      policy.after_first_view = this.settings.afterFirstViewDays * DAY_SECONDS;
    }
    if (this.settings.expiresAt !== null) policy.absolute_expiry = this.settings.expiresAt;
    return policy;
  }

  /** Ask the server which spans look sensitive; shown as highlights. */
  async suggest(): Promise<ScrubSpan[]> {
    const result = await this.api.scrub(this.text);
    this.suggestions = result.spans;
    this.onChange();
    return this.suggestions;
  }

  applySuggestion(span: ScrubSpan): void {
    this.setSelection(span.start, span.end);
  }

  async bind(): Promise<CreatedContent> {
    if (!this.canBind) throw new Error("nothing selected to bind");
    this.busy = true;
    this.error = null;
    this.onChange();
    try {
      const isBound = this.settings.kind === "dashboard" || this.settings.kind === "web-reference";
      const request = {
        kind: this.settings.kind,
        kt_enabled: this.settings.kt,
        include_alt: this.settings.includeAlt,
        ...(this.settings.includeAlt && this.settings.altText
          ? { alt_text: this.settings.altText }
          : {}),
        ...(isBound
          ? { binding: this.settings.binding as BindingInput }
          : { text: this.selectionText, policy: this.policy() }),
      };
      const created = await this.api.createContent(request);
      this.tokens.remember({
        contentId: created.content_id,
        token: created.edit_token,
        kind: this.settings.kind,
        label: isBound
          ? (this.settings.binding as BindingInput).url
          : this.selectionText.slice(0, 40),
        createdAt: Date.now() / 1000,
      });
      this.lastResult = created;
      return created;
    } catch (err) {
      this.error = err instanceof Error ? err.message : String(err);
      throw err;
    } finally {
      this.busy = false;
      this.onChange();
    }
  }
}
